// Conic Scan-and-Cover estimators: the exact-point scan, the document scan
// with mean-shifting, outlier rejection, weighted spherical k-means and
// max-projection radius estimation, plus anchor-word detection on
// co-occurrence rows.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cosac/common.hpp"
#include "cosac/corpus.hpp"
#include "cosac/geometry.hpp"

namespace cosac {

struct ScanConfig {
    double omega = 0.6;                    // cone aperture
    double norm_threshold_quantile = 0.5;  // R = this quantile of centered norms
    double outlier_fraction = 0.001;       // lambda: cones with card <= lambda*M rejected
    double mean_shift_tol = 1e-6;          // cosine-distance change threshold
    std::size_t mean_shift_max_iters = 100;
    std::size_t kmeans_iters = 30;
    std::optional<double> explicit_norm_threshold;  // overrides the quantile

    void validate() const {
        if (!(omega > 0.0) || !(omega < 2.0))
            throw std::invalid_argument("ScanConfig: omega must lie in (0, 2)");
        if (!(norm_threshold_quantile > 0.0) || !(norm_threshold_quantile < 1.0))
            throw std::invalid_argument("ScanConfig: quantile must lie in (0, 1)");
        if (!(outlier_fraction >= 0.0) || !(outlier_fraction < 1.0))
            throw std::invalid_argument("ScanConfig: outlier fraction must lie in [0, 1)");
    }
};

/// Defaults for scanning co-occurrence rows in anchor mode.
inline ScanConfig anchor_scan_defaults() {
    ScanConfig cfg;
    cfg.omega = 0.4;
    cfg.outlier_fraction = 0.015;
    return cfg;
}

struct TopicEstimate {
    std::size_t k_hat = 0;
    std::vector<DenseVector> directions;  // unit norm
    std::vector<double> radii;
    std::vector<DenseVector> topics;  // on the probability simplex
    std::vector<std::size_t> cone_cardinalities;
    std::size_t rejected_cones = 0;
    // provenance for serialization
    double omega = 0.0;
    double norm_threshold = 0.0;
    double outlier_fraction = 0.0;
};

/// Per-iteration scan diagnostics (cone cardinality, max active norm).
struct ScanTrace {
    struct Iteration {
        std::size_t iteration = 0;
        std::size_t seed_doc = 0;  // argmax-norm document that seeded the cone
        double max_norm = 0.0;
        std::size_t cone_size = 0;
        bool kept = false;
    };
    std::vector<Iteration> iterations;
};

/// Lower-median style threshold: element at index floor(q * M) of the sorted
/// norms (the median for odd M).
inline double norm_threshold_from_quantile(const std::vector<double>& norms, double q) {
    if (norms.empty()) return 0.0;
    std::vector<double> sorted(norms);
    std::size_t idx = static_cast<std::size_t>(q * static_cast<double>(sorted.size()));
    if (idx >= sorted.size()) idx = sorted.size() - 1;
    std::nth_element(sorted.begin(), sorted.begin() + idx, sorted.end());
    return sorted[idx];
}

namespace detail {

// argmax-norm active document with norm > threshold; ties break to the lowest
// index. Returns npos when the stopping criterion holds.
inline std::size_t farthest_active(const CenteredCorpus& corpus, const std::vector<char>& active,
                                   double threshold) {
    std::size_t best = static_cast<std::size_t>(-1);
    double best_norm = threshold;
    for (std::size_t m = 0; m < corpus.n_docs; ++m) {
        if (!active[m]) continue;
        if (corpus.norms[m] > best_norm) {
            best_norm = corpus.norms[m];
            best = m;
        }
    }
    return best;
}

// Indices of active documents inside the open cone around v. Zero-norm
// documents are never members.
inline std::vector<std::uint32_t> cone_members(const CenteredCorpus& corpus,
                                               const std::vector<char>& active,
                                               std::span<const double> v, double omega) {
    std::vector<std::uint32_t> members;
    const double vnorm = l2_norm(v);
    if (vnorm == 0.0) return members;
    for (std::size_t m = 0; m < corpus.n_docs; ++m) {
        if (!active[m] || corpus.norms[m] == 0.0) continue;
        const double c = dot(v, corpus.row(m)) / (vnorm * corpus.norms[m]);
        if (1.0 - std::clamp(c, -1.0, 1.0) < omega) members.push_back(static_cast<std::uint32_t>(m));
    }
    return members;
}

inline DenseVector clip_and_renormalize(DenseVector x) {
    double sum = 0.0;
    for (auto& c : x) {
        if (c < 0.0) c = 0.0;
        sum += c;
    }
    if (sum > 0.0)
        for (auto& c : x) c /= sum;
    return x;
}

}  // namespace detail

/// Algorithm-1 scan over exact points: repeatedly take the farthest active
/// point, remove its cone, and record the point itself (plus the center) as a
/// topic. Stops once no active norm exceeds the threshold.
inline TopicEstimate scan_points(const CenteredCorpus& corpus, double omega,
                                 double norm_threshold, ScanTrace* trace = nullptr) {
    if (!(omega > 0.0) || !(omega < 2.0))
        throw std::invalid_argument("scan_points: omega must lie in (0, 2)");
    if (norm_threshold < 0.0)
        throw std::invalid_argument("scan_points: norm threshold must be nonnegative");
    TopicEstimate est;
    est.omega = omega;
    est.norm_threshold = norm_threshold;
    std::vector<char> active(corpus.n_docs, 1);
    std::size_t iter = 0;
    for (;;) {
        const std::size_t seed = detail::farthest_active(corpus, active, norm_threshold);
        if (seed == static_cast<std::size_t>(-1)) break;
        const auto row = corpus.row(seed);
        DenseVector v(row.begin(), row.end());
        auto cone = detail::cone_members(corpus, active, v, omega);
        // the seed always lies in its own cone (distance 0), so progress is guaranteed
        for (auto m : cone) active[m] = 0;
        est.directions.emplace_back(v);
        const double r = corpus.norms[seed];
        for (auto& c : est.directions.back()) c /= r;
        est.radii.push_back(r);
        DenseVector topic(corpus.dim);
        for (std::size_t c = 0; c < corpus.dim; ++c) topic[c] = v[c] + corpus.center[c];
        est.topics.push_back(detail::clip_and_renormalize(std::move(topic)));
        est.cone_cardinalities.push_back(cone.size());
        if (trace)
            trace->iterations.push_back({iter, seed, r, cone.size(), true});
        ++iter;
    }
    est.k_hat = est.topics.size();
    return est;
}

struct MeanShiftOutcome {
    DenseVector direction;  // last direction whose cone was nonempty
    bool cone_emptied = false;
    std::size_t iterations = 0;
};

namespace detail {

// Core mean-shift loop. When the converged direction is bit-identical to the
// axis whose cone was last computed (a one-point cone converging onto itself,
// the dominant case in noisy corpora), that cone is still valid for the
// returned direction and is handed back through `reusable_cone`.
inline MeanShiftOutcome mean_shift_impl(const CenteredCorpus& corpus,
                                        const std::vector<char>& active, const DenseVector& v0,
                                        double omega, double tol, std::size_t max_iters,
                                        std::vector<std::uint32_t>* reusable_cone) {
    if (l2_norm(v0) == 0.0) throw std::invalid_argument("mean_shift: zero-norm initial direction");
    MeanShiftOutcome out;
    out.direction = v0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        auto cone = detail::cone_members(corpus, active, out.direction, omega);
        if (cone.empty()) {
            out.cone_emptied = true;
            return out;
        }
        DenseVector next(corpus.dim, 0.0);
        for (auto m : cone) {
            const auto row = corpus.row(m);
            for (std::size_t c = 0; c < corpus.dim; ++c) next[c] += row[c];
        }
        const double inv = 1.0 / static_cast<double>(cone.size());
        for (auto& c : next) c *= inv;
        if (l2_norm(next) == 0.0) {
            out.cone_emptied = true;  // degenerate mean, no usable direction
            return out;
        }
        const double change = cosine_distance(out.direction, next);
        const bool unmoved = (next == out.direction);
        out.direction = std::move(next);
        out.iterations = it + 1;
        if (change < tol) {
            if (unmoved && reusable_cone) *reusable_cone = std::move(cone);
            break;
        }
    }
    return out;
}

}  // namespace detail

/// Mean-shifting: re-centers the cone on the plain mean of the active
/// documents it contains until the direction stabilizes in cosine distance.
/// The cone is recomputed against `active` each iteration. If an iterate's
/// cone empties, the last direction with a nonempty cone is returned with
/// cone_emptied set; callers treat that direction as rejected.
inline MeanShiftOutcome mean_shift(const CenteredCorpus& corpus, const std::vector<char>& active,
                                   const DenseVector& v0, double omega, double tol,
                                   std::size_t max_iters) {
    return detail::mean_shift_impl(corpus, active, v0, omega, tol, max_iters, nullptr);
}

struct KmeansResult {
    std::vector<DenseVector> directions;  // unit norm
    std::vector<double> objective;        // value after each Lloyd iteration
    bool degenerate = false;              // all documents at zero norm
};

/// Assignment rule shared by k-means and radius estimation: document m goes to
/// argmax_k cos(v_k, w_m), ties to the lowest k; zero-norm documents go to
/// cluster 0 and contribute nothing to updates.
inline std::vector<std::uint32_t> assign_to_directions(const CenteredCorpus& corpus,
                                                       const std::vector<DenseVector>& directions) {
    if (directions.empty()) throw std::invalid_argument("assign_to_directions: no directions");
    std::vector<std::uint32_t> assign(corpus.n_docs, 0);
    for (std::size_t m = 0; m < corpus.n_docs; ++m) {
        if (corpus.norms[m] == 0.0) continue;
        const auto row = corpus.row(m);
        double best = -std::numeric_limits<double>::infinity();
        std::uint32_t best_k = 0;
        for (std::size_t k = 0; k < directions.size(); ++k) {
            const double d = dot(directions[k], row);
            if (d > best) {
                best = d;
                best_k = static_cast<std::uint32_t>(k);
            }
        }
        assign[m] = best_k;
    }
    return assign;
}

/// Weighted spherical k-means with Lloyd updates. The objective
///   sum_k sum_{m in S^k} ||w_m|| (1 - cos(v_k, w_m))
/// is reported after every iteration and is non-increasing; a violation
/// beyond float slack throws, since the update steps are exact maximizers.
inline KmeansResult weighted_spherical_kmeans(const CenteredCorpus& corpus,
                                              const std::vector<DenseVector>& init_directions,
                                              std::size_t iters) {
    if (init_directions.empty())
        throw std::invalid_argument("weighted_spherical_kmeans: empty initialization");
    KmeansResult res;
    res.directions.reserve(init_directions.size());
    for (const auto& v : init_directions) {
        const double n = l2_norm(v);
        if (n == 0.0)
            throw std::invalid_argument("weighted_spherical_kmeans: zero-norm init direction");
        DenseVector u(v);
        for (auto& c : u) c /= n;
        res.directions.push_back(std::move(u));
    }
    double total_norm = 0.0;
    for (double n : corpus.norms) total_norm += n;
    if (total_norm == 0.0) {
        res.degenerate = true;
        return res;
    }
    if (iters == 0) return res;

    const std::size_t k = res.directions.size();
    std::vector<double> sums(k * corpus.dim);
    double prev_obj = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < iters; ++it) {
        const auto assign = assign_to_directions(corpus, res.directions);
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t m = 0; m < corpus.n_docs; ++m) {
            if (corpus.norms[m] == 0.0) continue;
            const auto row = corpus.row(m);
            double* s = sums.data() + assign[m] * corpus.dim;
            for (std::size_t c = 0; c < corpus.dim; ++c) s[c] += row[c];
        }
        double obj = total_norm;
        for (std::size_t j = 0; j < k; ++j) {
            std::span<const double> s(sums.data() + j * corpus.dim, corpus.dim);
            const double n = l2_norm(s);
            if (n > 0.0) {
                for (std::size_t c = 0; c < corpus.dim; ++c) res.directions[j][c] = s[c] / n;
                obj -= n;
            }
            // empty (or cancelled) cluster keeps its previous direction
        }
        if (obj > prev_obj + 1e-9 * (1.0 + std::fabs(prev_obj)))
            throw std::logic_error("weighted_spherical_kmeans: objective increased");
        prev_obj = obj;
        res.objective.push_back(obj);
    }
    return res;
}

struct RadiiEstimate {
    std::vector<double> radii;
    std::vector<bool> used_fallback;  // empty/nonpositive partition fell back to the global max
};

/// Topic lengths along each direction: R_l = max over the documents assigned
/// to direction l of <v_l, w_m>. An empty partition (or one with no positive
/// projection) falls back to the global max projection.
inline RadiiEstimate estimate_radii(const CenteredCorpus& corpus,
                                    const std::vector<DenseVector>& directions) {
    if (corpus.n_docs == 0) throw std::invalid_argument("estimate_radii: empty corpus");
    const auto assign = assign_to_directions(corpus, directions);
    const std::size_t k = directions.size();
    RadiiEstimate res;
    res.radii.assign(k, -std::numeric_limits<double>::infinity());
    res.used_fallback.assign(k, false);
    std::vector<double> global_max(k, -std::numeric_limits<double>::infinity());
    for (std::size_t m = 0; m < corpus.n_docs; ++m) {
        const auto row = corpus.row(m);
        for (std::size_t j = 0; j < k; ++j) {
            const double p = dot(directions[j], row);
            global_max[j] = std::max(global_max[j], p);
            if (assign[m] == j && corpus.norms[m] > 0.0) res.radii[j] = std::max(res.radii[j], p);
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        if (!(res.radii[j] > 0.0)) {
            res.radii[j] = std::max(global_max[j], 0.0);
            res.used_fallback[j] = true;
        }
    }
    return res;
}

/// Algorithm-2 scan over noisy documents: farthest point, mean-shift, remove
/// the final cone, keep the direction only when its cone holds more than
/// outlier_fraction * M documents; afterwards refine the kept directions with
/// weighted spherical k-means, estimate radii by max projection, and
/// reconstruct topics as R_l v_l + center (clipped back onto the simplex).
/// Zero surviving directions yield an explicit k_hat = 0 estimate.
inline TopicEstimate scan_documents(const CenteredCorpus& corpus, const ScanConfig& config,
                                    ScanTrace* trace = nullptr, KmeansResult* kmeans_report = nullptr) {
    config.validate();
    TopicEstimate est;
    est.omega = config.omega;
    est.outlier_fraction = config.outlier_fraction;
    const double threshold = config.explicit_norm_threshold
                                 ? *config.explicit_norm_threshold
                                 : norm_threshold_from_quantile(corpus.norms,
                                                                config.norm_threshold_quantile);
    est.norm_threshold = threshold;
    if (corpus.n_docs == 0) return est;

    const double reject_below = config.outlier_fraction * static_cast<double>(corpus.n_docs);
    std::vector<char> active(corpus.n_docs, 1);
    std::vector<DenseVector> kept;
    std::vector<std::size_t> kept_cards;
    std::size_t iter = 0;
    for (;;) {
        const std::size_t seed = detail::farthest_active(corpus, active, threshold);
        if (seed == static_cast<std::size_t>(-1)) break;
        const auto row = corpus.row(seed);
        DenseVector v0(row.begin(), row.end());
        std::vector<std::uint32_t> cone;
        const auto ms = detail::mean_shift_impl(corpus, active, v0, config.omega,
                                                config.mean_shift_tol,
                                                config.mean_shift_max_iters, &cone);
        if (cone.empty())
            cone = detail::cone_members(corpus, active, ms.direction, config.omega);
        if (cone.empty()) {
            // converged direction drifted off every active document; drop the
            // seed alone so the scan still makes progress
            active[seed] = 0;
            ++est.rejected_cones;
            if (trace)
                trace->iterations.push_back({iter, seed, corpus.norms[seed], 0, false});
            ++iter;
            continue;
        }
        for (auto m : cone) active[m] = 0;
        const bool keep = !ms.cone_emptied && static_cast<double>(cone.size()) > reject_below;
        if (keep) {
            kept.push_back(ms.direction);
            kept_cards.push_back(cone.size());
        } else {
            ++est.rejected_cones;
        }
        if (trace)
            trace->iterations.push_back({iter, seed, corpus.norms[seed], cone.size(), keep});
        ++iter;
    }
    if (kept.empty()) return est;  // no topics found

    auto km = weighted_spherical_kmeans(corpus, kept, config.kmeans_iters);
    auto radii = estimate_radii(corpus, km.directions);
    est.k_hat = km.directions.size();
    est.directions = km.directions;
    est.radii = radii.radii;
    est.cone_cardinalities = kept_cards;
    est.topics.reserve(est.k_hat);
    for (std::size_t l = 0; l < est.k_hat; ++l) {
        DenseVector topic(corpus.dim);
        for (std::size_t c = 0; c < corpus.dim; ++c)
            topic[c] = est.radii[l] * est.directions[l][c] + corpus.center[c];
        est.topics.push_back(detail::clip_and_renormalize(std::move(topic)));
    }
    if (kmeans_report) *kmeans_report = std::move(km);
    return est;
}

/// Anchor-word detection: treat co-occurrence rows as documents, center them,
/// and run the exact-point scan with the document scan's outlier rejection
/// (no mean-shifting). Each kept cone contributes the vocabulary index of its
/// farthest row.
inline std::vector<std::uint32_t> find_anchors(const CooccurrenceRows& rows,
                                               const ScanConfig& config,
                                               ScanTrace* trace = nullptr) {
    config.validate();
    const std::size_t n = rows.n_rows();
    if (n < 2) throw std::invalid_argument("find_anchors: fewer than 2 usable rows");
    std::vector<DenseVector> points(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = rows.row(i);
        points[i].assign(r.begin(), r.end());
    }
    const CenteredCorpus corpus = center_points(points);
    const double threshold = config.explicit_norm_threshold
                                 ? *config.explicit_norm_threshold
                                 : norm_threshold_from_quantile(corpus.norms,
                                                                config.norm_threshold_quantile);
    const double reject_below = config.outlier_fraction * static_cast<double>(n);
    std::vector<char> active(n, 1);
    std::vector<std::uint32_t> anchors;
    std::size_t iter = 0;
    for (;;) {
        const std::size_t seed = detail::farthest_active(corpus, active, threshold);
        if (seed == static_cast<std::size_t>(-1)) break;
        auto cone = detail::cone_members(corpus, active, corpus.row(seed), config.omega);
        for (auto m : cone) active[m] = 0;
        const bool keep = static_cast<double>(cone.size()) > reject_below;
        if (keep) anchors.push_back(rows.word_ids[seed]);
        if (trace)
            trace->iterations.push_back({iter, seed, corpus.norms[seed], cone.size(), keep});
        ++iter;
    }
    return anchors;
}

}  // namespace cosac
