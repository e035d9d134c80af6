// Bag-of-words ingestion, normalization/centering, and the word co-occurrence
// rows consumed by anchor detection.
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cosac/common.hpp"

namespace cosac {

/// Sparse document-term counts. Documents that end up empty during ingestion
/// are dropped and counted in removed_empty_docs.
struct BagOfWords {
    std::size_t n_docs = 0;      // M (after removals)
    std::size_t vocab_size = 0;  // V
    // per document: (word index, count), sorted by word index
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> counts;
    std::vector<std::uint64_t> doc_lengths;  // N_m, row sums
    std::size_t removed_empty_docs = 0;
};

/// Mean-centered normalized documents with cached norms. The rows satisfy
/// sum_m centered[m] ~= 0 and centered[m] + center lies on the probability
/// simplex.
struct CenteredCorpus {
    std::size_t n_docs = 0;
    std::size_t dim = 0;
    DenseVector center;
    std::vector<double> data;  // n_docs x dim, row-major
    std::vector<double> norms;

    std::span<const double> row(std::size_t m) const {
        return std::span<const double>(data.data() + m * dim, dim);
    }
    std::span<double> row(std::size_t m) {
        return std::span<double>(data.data() + m * dim, dim);
    }
};

/// Row-normalized word-to-word co-occurrence. Words with zero marginal are
/// dropped; word_ids maps kept rows back to vocabulary indices.
struct CooccurrenceRows {
    std::size_t vocab_size = 0;
    std::vector<std::uint32_t> word_ids;  // kept row -> original word index
    std::vector<double> data;             // kept x vocab_size, rows sum to 1
    std::vector<double> row_weights;      // pre-normalization marginals
    std::vector<std::uint32_t> dropped_words;
    std::size_t skipped_short_docs = 0;  // documents with N_m < 2

    std::size_t n_rows() const { return word_ids.size(); }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data.data() + i * vocab_size, vocab_size);
    }
};

namespace detail {

inline bool parse_u64(const std::string& s, std::uint64_t& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t' || *b == '\r')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
    if (b == e) return false;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

inline bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

}  // namespace detail

/// Reads the UCI bag-of-words format: three header lines (M, V, NNZ) followed
/// by NNZ lines "docID wordID count", all 1-indexed.
inline BagOfWords load_uci_bow(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::uint64_t header[3];
    for (int h = 0; h < 3; ++h) {
        if (!std::getline(in, line)) throw ParseError("unexpected end of header", line_no + 1);
        ++line_no;
        if (!detail::parse_u64(line, header[h]) || header[h] == 0)
            throw ParseError("malformed header value", line_no);
    }
    const std::uint64_t m = header[0];
    const std::uint64_t v = header[1];
    const std::uint64_t nnz = header[2];

    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> acc(m);
    for (std::uint64_t entry = 0; entry < nnz; ++entry) {
        if (!std::getline(in, line))
            throw ParseError("fewer entries than the declared NNZ", line_no + 1);
        ++line_no;
        const char* b = line.data();
        const char* e = line.data() + line.size();
        std::uint64_t vals[3];
        for (int f = 0; f < 3; ++f) {
            while (b < e && (*b == ' ' || *b == '\t' || *b == '\r')) ++b;
            auto [p, ec] = std::from_chars(b, e, vals[f]);
            if (ec != std::errc() || p == b) throw ParseError("malformed entry", line_no);
            b = p;
        }
        while (b < e && (*b == ' ' || *b == '\t' || *b == '\r')) ++b;
        if (b != e) throw ParseError("trailing characters on entry", line_no);
        if (vals[0] < 1 || vals[0] > m) throw ParseError("document id out of range", line_no);
        if (vals[1] < 1 || vals[1] > v) throw ParseError("word id out of range", line_no);
        if (vals[2] < 1) throw ParseError("count must be positive", line_no);
        acc[vals[0] - 1].emplace_back(static_cast<std::uint32_t>(vals[1] - 1),
                                      static_cast<std::uint32_t>(vals[2]));
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::blank(line)) throw ParseError("more entries than the declared NNZ", line_no);
    }

    BagOfWords bow;
    bow.vocab_size = static_cast<std::size_t>(v);
    for (std::uint64_t d = 0; d < m; ++d) {
        auto& row = acc[d];
        if (row.empty()) {
            ++bow.removed_empty_docs;
            continue;
        }
        std::sort(row.begin(), row.end());
        // merge duplicate (doc, word) entries
        std::size_t out = 0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (out > 0 && row[out - 1].first == row[i].first)
                row[out - 1].second += row[i].second;
            else
                row[out++] = row[i];
        }
        row.resize(out);
        std::uint64_t total = 0;
        for (const auto& [w, c] : row) total += c;
        bow.counts.push_back(std::move(row));
        bow.doc_lengths.push_back(total);
    }
    bow.n_docs = bow.counts.size();
    return bow;
}

inline void save_uci_bow(std::ostream& out, const BagOfWords& bow) {
    std::size_t nnz = 0;
    for (const auto& row : bow.counts) nnz += row.size();
    out << bow.n_docs << "\n" << bow.vocab_size << "\n" << nnz << "\n";
    for (std::size_t d = 0; d < bow.n_docs; ++d)
        for (const auto& [w, c] : bow.counts[d])
            out << (d + 1) << " " << (w + 1) << " " << c << "\n";
}

namespace detail {

// Centering core shared by the count and exact-point paths. Summation runs in
// fixed document order so repeated runs are bit-identical.
inline CenteredCorpus center_rows(std::vector<double> rows, std::size_t n, std::size_t v) {
    CenteredCorpus cc;
    cc.n_docs = n;
    cc.dim = v;
    cc.center.assign(v, 0.0);
    if (n == 0) return cc;
    for (std::size_t m = 0; m < n; ++m) {
        const double* r = rows.data() + m * v;
        for (std::size_t c = 0; c < v; ++c) cc.center[c] += r[c];
    }
    for (std::size_t c = 0; c < v; ++c) cc.center[c] /= static_cast<double>(n);
    cc.data = std::move(rows);
    cc.norms.assign(n, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
        double* r = cc.data.data() + m * v;
        double s = 0.0;
        for (std::size_t c = 0; c < v; ++c) {
            r[c] -= cc.center[c];
            s += r[c] * r[c];
        }
        cc.norms[m] = std::sqrt(s);
    }
    return cc;
}

}  // namespace detail

/// Normalizes counts to document distributions w_m / N_m, then centers at
/// their mean.
inline CenteredCorpus normalize_and_center(const BagOfWords& bow) {
    std::vector<double> rows(bow.n_docs * bow.vocab_size, 0.0);
    for (std::size_t m = 0; m < bow.n_docs; ++m) {
        const double inv = 1.0 / static_cast<double>(bow.doc_lengths[m]);
        double* r = rows.data() + m * bow.vocab_size;
        for (const auto& [w, c] : bow.counts[m]) r[w] = static_cast<double>(c) * inv;
    }
    return detail::center_rows(std::move(rows), bow.n_docs, bow.vocab_size);
}

/// Centers exact distributions (already on the probability simplex).
inline CenteredCorpus center_points(const std::vector<DenseVector>& points) {
    if (points.empty()) return CenteredCorpus{};
    const std::size_t v = points.front().size();
    std::vector<double> rows(points.size() * v);
    for (std::size_t m = 0; m < points.size(); ++m) {
        if (points[m].size() != v)
            throw std::invalid_argument("center_points: dimension mismatch");
        double sum = 0.0;
        for (std::size_t c = 0; c < v; ++c) {
            const double x = points[m][c];
            if (x < -1e-8)
                throw std::invalid_argument("center_points: negative coordinate at point " +
                                            std::to_string(m));
            sum += x;
            rows[m * v + c] = x;
        }
        if (std::abs(sum - 1.0) > 1e-8)
            throw std::invalid_argument("center_points: point " + std::to_string(m) +
                                        " is not on the probability simplex");
    }
    return detail::center_rows(std::move(rows), points.size(), v);
}

/// Diagonal-corrected second-moment co-occurrence:
///   Q ~ sum_m [w_m w_m^T - diag(w_m)] / (N_m (N_m - 1)),
/// row-normalized. Documents with fewer than two words carry no pair
/// information and are skipped.
inline CooccurrenceRows cooccurrence(const BagOfWords& bow) {
    const std::size_t v = bow.vocab_size;
    CooccurrenceRows res;
    res.vocab_size = v;
    std::vector<double> q(v * v, 0.0);
    for (std::size_t m = 0; m < bow.n_docs; ++m) {
        const std::uint64_t n = bow.doc_lengths[m];
        if (n < 2) {
            ++res.skipped_short_docs;
            continue;
        }
        const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
        const auto& row = bow.counts[m];
        for (std::size_t a = 0; a < row.size(); ++a) {
            const auto [wa, ca] = row[a];
            q[static_cast<std::size_t>(wa) * v + wa] +=
                static_cast<double>(ca) * static_cast<double>(ca - 1) * scale;
            for (std::size_t b = a + 1; b < row.size(); ++b) {
                const auto [wb, cb] = row[b];
                const double x = static_cast<double>(ca) * static_cast<double>(cb) * scale;
                q[static_cast<std::size_t>(wa) * v + wb] += x;
                q[static_cast<std::size_t>(wb) * v + wa] += x;
            }
        }
    }
    for (std::uint32_t w = 0; w < v; ++w) {
        double sum = 0.0;
        for (std::size_t c = 0; c < v; ++c) sum += q[static_cast<std::size_t>(w) * v + c];
        if (sum > 0.0) {
            res.word_ids.push_back(w);
            res.row_weights.push_back(sum);
            const std::size_t base = res.data.size();
            res.data.resize(base + v);
            for (std::size_t c = 0; c < v; ++c)
                res.data[base + c] = q[static_cast<std::size_t>(w) * v + c] / sum;
        } else {
            res.dropped_words.push_back(w);
        }
    }
    return res;
}

}  // namespace cosac
