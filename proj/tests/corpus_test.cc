#include "cosac/corpus.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cosac/rng.hpp"
#include "cosac/synth.hpp"

using namespace cosac;

namespace {

BagOfWords from_uci(const std::string& text) {
    std::istringstream in(text);
    return load_uci_bow(in);
}

}  // namespace

TEST(LoadUci, MinimalFile) {
    const auto bow = from_uci("2\n3\n3\n1 1 4\n1 3 1\n2 2 2\n");
    EXPECT_EQ(bow.n_docs, 2u);
    EXPECT_EQ(bow.vocab_size, 3u);
    ASSERT_EQ(bow.counts[0].size(), 2u);
    EXPECT_EQ(bow.counts[0][0], (std::pair<std::uint32_t, std::uint32_t>{0, 4}));
    EXPECT_EQ(bow.counts[0][1], (std::pair<std::uint32_t, std::uint32_t>{2, 1}));
    EXPECT_EQ(bow.doc_lengths[0], 5u);
    EXPECT_EQ(bow.doc_lengths[1], 2u);
    EXPECT_EQ(bow.removed_empty_docs, 0u);
}

TEST(LoadUci, EmptyDocumentRemoved) {
    const auto bow = from_uci("3\n2\n2\n1 1 1\n3 2 2\n");
    EXPECT_EQ(bow.n_docs, 2u);
    EXPECT_EQ(bow.removed_empty_docs, 1u);
}

TEST(LoadUci, ErrorsNameTheLine) {
    try {
        from_uci("2\n3\n3\n1 1 4\n1 5 2\n2 2 2\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 5u);  // the out-of-range word id
    }
    EXPECT_THROW(from_uci("x\n3\n1\n1 1 1\n"), ParseError);
    EXPECT_THROW(from_uci("2\n3\n2\n1 1 0\n1 2 1\n"), ParseError);   // count <= 0
    EXPECT_THROW(from_uci("2\n3\n4\n1 1 1\n1 2 1\n2 1 1\n"), ParseError);  // short of NNZ
    EXPECT_THROW(from_uci("1\n3\n1\n1 1 1\n1 2 1\n"), ParseError);   // extra entries
}

TEST(LoadUci, RoundTrip) {
    Rng rng(3);
    LdaSpec spec;
    spec.n_topics = 4;
    spec.vocab_size = 30;
    spec.n_docs = 60;
    spec.doc_lengths = {25};
    spec.alpha = {0.3};
    spec.eta = {0.5};
    spec.seed = 17;
    const auto sample = sample_lda(spec);
    std::ostringstream out;
    save_uci_bow(out, sample.bow);
    const auto reloaded = from_uci(out.str());
    EXPECT_EQ(reloaded.n_docs, sample.bow.n_docs);
    EXPECT_EQ(reloaded.vocab_size, sample.bow.vocab_size);
    EXPECT_EQ(reloaded.counts, sample.bow.counts);
    EXPECT_EQ(reloaded.doc_lengths, sample.bow.doc_lengths);
}

TEST(NormalizeAndCenter, SingleDocumentHasZeroCenteredVector) {
    const auto bow = from_uci("1\n3\n2\n1 1 3\n1 2 1\n");
    const auto cc = normalize_and_center(bow);
    EXPECT_EQ(cc.n_docs, 1u);
    EXPECT_NEAR(cc.norms[0], 0.0, 1e-15);
    for (double x : cc.row(0)) EXPECT_NEAR(x, 0.0, 1e-15);
}

TEST(NormalizeAndCenter, SymmetricPair) {
    const auto bow = from_uci("2\n2\n2\n1 1 4\n2 2 6\n");
    const auto cc = normalize_and_center(bow);
    EXPECT_DOUBLE_EQ(cc.center[0], 0.5);
    EXPECT_DOUBLE_EQ(cc.center[1], 0.5);
    EXPECT_NEAR(cc.norms[0], std::sqrt(2.0) / 2.0, 1e-15);
    EXPECT_NEAR(cc.norms[1], std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(NormalizeAndCenter, SyntheticCorpusInvariants) {
    LdaSpec spec;
    spec.n_topics = 5;
    spec.vocab_size = 40;
    spec.n_docs = 300;
    spec.doc_lengths = {50};
    spec.alpha = {0.2};
    spec.eta = {0.3};
    spec.seed = 9;
    const auto sample = sample_lda(spec);
    const auto cc = normalize_and_center(sample.bow);

    // independent mean recomputation
    DenseVector mean(cc.dim, 0.0);
    for (std::size_t m = 0; m < cc.n_docs; ++m) {
        const double inv = 1.0 / static_cast<double>(sample.bow.doc_lengths[m]);
        for (const auto& [w, c] : sample.bow.counts[m]) mean[w] += c * inv;
    }
    for (auto& x : mean) x /= static_cast<double>(cc.n_docs);
    for (std::size_t c = 0; c < cc.dim; ++c) EXPECT_NEAR(cc.center[c], mean[c], 1e-14);

    // centered rows sum to zero coordinate-wise
    DenseVector colsum(cc.dim, 0.0);
    for (std::size_t m = 0; m < cc.n_docs; ++m)
        for (std::size_t c = 0; c < cc.dim; ++c) colsum[c] += cc.row(m)[c];
    for (double x : colsum) EXPECT_NEAR(x, 0.0, 1e-10);

    // centered + center lies on the simplex; cached norms are fresh
    for (std::size_t m = 0; m < cc.n_docs; ++m) {
        double sum = 0.0;
        for (std::size_t c = 0; c < cc.dim; ++c) {
            const double coord = cc.row(m)[c] + cc.center[c];
            EXPECT_GE(coord, -1e-12);
            sum += coord;
        }
        EXPECT_NEAR(sum, 1.0, 1e-10);
        EXPECT_NEAR(cc.norms[m], l2_norm(cc.row(m)), 1e-14);
    }
}

TEST(CenterPoints, SimplexVerticesAndValidation) {
    const std::vector<DenseVector> vertices = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const auto cc = center_points(vertices);
    for (double c : cc.center) EXPECT_NEAR(c, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(cc.norms[0], cc.norms[1], 1e-15);
    EXPECT_NEAR(cc.norms[1], cc.norms[2], 1e-15);

    const std::vector<DenseVector> same = {{0.2, 0.8}, {0.2, 0.8}, {0.2, 0.8}};
    const auto cc2 = center_points(same);
    for (double n : cc2.norms) EXPECT_NEAR(n, 0.0, 1e-15);

    EXPECT_THROW(center_points({{0.5, 0.6}}), std::invalid_argument);
    EXPECT_THROW(center_points({{-0.1, 1.1}}), std::invalid_argument);
}

TEST(CenterPoints, DirichletMeanNearCentroid) {
    // law of large numbers: center within 5 standard errors of the centroid
    const std::size_t v = 8;
    const std::size_t m = 10000;
    Rng rng(77);
    std::vector<double> alpha(v, 1.0);
    std::vector<DenseVector> points(m, DenseVector(v));
    for (auto& p : points) rng.dirichlet(alpha, p);
    const auto cc = center_points(points);
    // Var of a Dir(1,...,1) coordinate = (v-1)/(v^2 (v+1))
    const double sd = std::sqrt((v - 1.0) / (static_cast<double>(v) * v * (v + 1.0)) /
                                static_cast<double>(m));
    for (double c : cc.center) EXPECT_NEAR(c, 1.0 / static_cast<double>(v), 5.0 * sd);
}

TEST(CenteringIdempotence, ExactArithmeticCaseIsBitIdentical) {
    // dyadic-rational inputs keep every step exact
    const std::vector<DenseVector> points = {{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}, {0.25, 0.75}};
    const auto cc = center_points(points);
    std::vector<DenseVector> rebuilt(points.size(), DenseVector(2));
    for (std::size_t m = 0; m < points.size(); ++m)
        for (std::size_t c = 0; c < 2; ++c) rebuilt[m][c] = cc.row(m)[c] + cc.center[c];
    const auto cc2 = center_points(rebuilt);
    for (std::size_t m = 0; m < points.size(); ++m)
        for (std::size_t c = 0; c < 2; ++c)
            EXPECT_EQ(cc.row(m)[c], cc2.row(m)[c]);  // bit-for-bit
}

TEST(Cooccurrence, HandComputedSingleDocument) {
    // counts (2, 1, 0), N = 3: Q = [[2,2,0],[2,0,0],[0,0,0]] / 6
    const auto bow = from_uci("1\n3\n2\n1 1 2\n1 2 1\n");
    const auto rows = cooccurrence(bow);
    ASSERT_EQ(rows.n_rows(), 2u);
    EXPECT_EQ(rows.word_ids[0], 0u);
    EXPECT_EQ(rows.word_ids[1], 1u);
    EXPECT_NEAR(rows.row(0)[0], 0.5, 1e-15);
    EXPECT_NEAR(rows.row(0)[1], 0.5, 1e-15);
    EXPECT_NEAR(rows.row(0)[2], 0.0, 1e-15);
    EXPECT_NEAR(rows.row(1)[0], 1.0, 1e-15);  // row 1 normalizes to (1, 0, 0)
    ASSERT_EQ(rows.dropped_words.size(), 1u);
    EXPECT_EQ(rows.dropped_words[0], 2u);
    // marginals before normalization: row 0 weight 4/6, row 1 weight 2/6
    EXPECT_NEAR(rows.row_weights[0], 4.0 / 6.0, 1e-15);
    EXPECT_NEAR(rows.row_weights[1], 2.0 / 6.0, 1e-15);
}

TEST(Cooccurrence, RepeatedWordDocumentKeepsDiagonalOnly) {
    const auto bow = from_uci("1\n2\n1\n1 1 5\n");
    const auto rows = cooccurrence(bow);
    ASSERT_EQ(rows.n_rows(), 1u);
    EXPECT_EQ(rows.word_ids[0], 0u);
    EXPECT_NEAR(rows.row(0)[0], 1.0, 1e-15);  // 5*4/20 = 1 at the diagonal
    EXPECT_NEAR(rows.row(0)[1], 0.0, 1e-15);
}

TEST(Cooccurrence, ShortDocumentsSkipped) {
    const auto bow = from_uci("2\n2\n2\n1 1 1\n2 1 3\n");
    const auto rows = cooccurrence(bow);
    EXPECT_EQ(rows.skipped_short_docs, 1u);  // the N=1 document
}

TEST(Cooccurrence, EmpiricalRowsConvergeToPopulation) {
    // population co-occurrence: beta^T diag-corrected E[theta theta^T] beta
    LdaSpec spec;
    spec.n_topics = 3;
    spec.vocab_size = 12;
    spec.n_docs = 8000;
    spec.doc_lengths = {40};
    spec.alpha = {0.5};
    spec.eta = {0.4};
    spec.seed = 23;
    const auto sample = sample_lda(spec);

    // E[theta theta^T] for Dir(alpha): (diag(a) + a a^T) / (a0 (a0 + 1))
    const std::size_t k = spec.n_topics, v = spec.vocab_size;
    const double a = 0.5, a0 = a * k;
    std::vector<double> pop(v * v, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double e = (a * a + (i == j ? a : 0.0)) / (a0 * (a0 + 1.0));
            for (std::size_t x = 0; x < v; ++x)
                for (std::size_t y = 0; y < v; ++y)
                    pop[x * v + y] += e * sample.truth.topics[i][x] * sample.truth.topics[j][y];
        }
    }
    auto row_error = [&](const CooccurrenceRows& rows) {
        double total = 0.0;
        std::size_t counted = 0;
        for (std::size_t r = 0; r < rows.n_rows(); ++r) {
            const std::size_t w = rows.word_ids[r];
            double norm = 0.0;
            for (std::size_t y = 0; y < v; ++y) norm += pop[w * v + y];
            double err = 0.0;
            for (std::size_t y = 0; y < v; ++y)
                err += std::fabs(rows.row(r)[y] - pop[w * v + y] / norm);
            total += err;
            ++counted;
        }
        return total / static_cast<double>(counted);
    };

    BagOfWords quarter;
    quarter.vocab_size = sample.bow.vocab_size;
    quarter.n_docs = sample.bow.n_docs / 4;
    quarter.counts.assign(sample.bow.counts.begin(),
                          sample.bow.counts.begin() + quarter.n_docs);
    quarter.doc_lengths.assign(sample.bow.doc_lengths.begin(),
                               sample.bow.doc_lengths.begin() + quarter.n_docs);
    const double err_full = row_error(cooccurrence(sample.bow));
    const double err_quarter = row_error(cooccurrence(quarter));
    EXPECT_LT(err_full, err_quarter);
}
