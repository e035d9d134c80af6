// Estimation-quality metrics: minimum-matching Euclidean distance,
// simplex-constrained projection for topic proportions, held-out perplexity.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "cosac/assignment.hpp"
#include "cosac/common.hpp"
#include "cosac/corpus.hpp"

namespace cosac {

struct MatchingResult {
    double distance = 0.0;      // mean matched Euclidean distance (headline)
    double max_distance = 0.0;  // max over matched pairs
    // estimated index -> matched truth index, -1 for unmatched estimates
    std::vector<std::ptrdiff_t> assignment;
    std::vector<double> per_topic_distances;  // per estimated topic; NaN if unmatched
    std::size_t unmatched = 0;                // |K_est - K_true|
};

/// Optimal injective matching of the smaller topic list into the larger,
/// minimizing total Euclidean distance.
inline MatchingResult min_matching_distance(const std::vector<DenseVector>& estimated,
                                            const std::vector<DenseVector>& truth) {
    if (estimated.empty() || truth.empty())
        throw std::invalid_argument("min_matching_distance: empty topic list");
    const std::size_t dim = estimated.front().size();
    for (const auto& t : estimated)
        if (t.size() != dim) throw std::invalid_argument("min_matching_distance: ragged input");
    for (const auto& t : truth)
        if (t.size() != dim)
            throw std::invalid_argument("min_matching_distance: dimension mismatch");

    const bool est_smaller = estimated.size() <= truth.size();
    const auto& small = est_smaller ? estimated : truth;
    const auto& large = est_smaller ? truth : estimated;
    std::vector<std::vector<double>> cost(small.size(), std::vector<double>(large.size()));
    for (std::size_t i = 0; i < small.size(); ++i) {
        for (std::size_t j = 0; j < large.size(); ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double d = small[i][c] - large[j][c];
                s += d * d;
            }
            cost[i][j] = std::sqrt(s);
        }
    }
    const auto row_to_col = solve_assignment(cost);

    MatchingResult res;
    res.unmatched = large.size() - small.size();
    res.assignment.assign(estimated.size(), -1);
    res.per_topic_distances.assign(estimated.size(),
                                   std::numeric_limits<double>::quiet_NaN());
    double total = 0.0;
    for (std::size_t i = 0; i < small.size(); ++i) {
        const double d = cost[i][row_to_col[i]];
        total += d;
        res.max_distance = std::max(res.max_distance, d);
        if (est_smaller) {
            res.assignment[i] = static_cast<std::ptrdiff_t>(row_to_col[i]);
            res.per_topic_distances[i] = d;
        } else {
            res.assignment[row_to_col[i]] = static_cast<std::ptrdiff_t>(i);
            res.per_topic_distances[row_to_col[i]] = d;
        }
    }
    res.distance = total / static_cast<double>(small.size());
    return res;
}

/// Euclidean projection of y onto the probability simplex (sorting method).
inline DenseVector project_onto_probability_simplex(DenseVector y) {
    std::vector<double> u(y);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double running = 0.0;
    double tau = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        running += u[j];
        const double t = (running - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0)
            tau = t;
        else
            break;
    }
    for (auto& x : y) x = std::max(x - tau, 0.0);
    return y;
}

struct SimplexProjection {
    DenseVector theta;
    double residual = 0.0;      // ||B theta - point||_2 at the returned theta
    double kkt_residual = 0.0;  // projected-gradient fixed-point residual (inf norm)
    std::size_t iterations = 0;
    bool converged = false;  // a false flag is the non-convergence error carrier
};

/// Barycentric coordinates of the Euclidean projection onto conv(topics):
/// argmin_theta ||sum_k theta_k beta_k - point||^2 over the simplex, solved by
/// projected gradient with fixed step 1/L (L bounded by power iteration).
/// Stops at KKT residual 1e-9 or 10^4 iterations.
inline SimplexProjection project_to_simplex(const DenseVector& point,
                                            const std::vector<DenseVector>& topics) {
    if (topics.empty()) throw std::invalid_argument("project_to_simplex: no topics");
    const std::size_t k = topics.size();
    const std::size_t v = point.size();
    for (const auto& t : topics)
        if (t.size() != v) throw std::invalid_argument("project_to_simplex: dimension mismatch");

    // Gram matrix and linear term
    std::vector<double> gram(k * k);
    std::vector<double> h(k);
    for (std::size_t i = 0; i < k; ++i) {
        h[i] = dot(topics[i], point);
        for (std::size_t j = i; j < k; ++j) {
            const double g = dot(topics[i], topics[j]);
            gram[i * k + j] = g;
            gram[j * k + i] = g;
        }
    }
    // largest eigenvalue bound via power iteration
    std::vector<double> x(k, 1.0 / std::sqrt(static_cast<double>(k))), gx(k);
    double lmax = 0.0;
    for (int it = 0; it < 100; ++it) {
        for (std::size_t i = 0; i < k; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += gram[i * k + j] * x[j];
            gx[i] = s;
        }
        const double n = l2_norm(gx);
        if (n == 0.0) break;
        lmax = n;
        for (std::size_t i = 0; i < k; ++i) x[i] = gx[i] / n;
    }
    if (lmax <= 0.0) lmax = 1.0;
    const double step = 1.0 / (2.0 * 1.01 * lmax);

    constexpr double kkt_tol = 1e-9;
    constexpr std::size_t max_iters = 10000;
    SimplexProjection out;
    out.theta.assign(k, 1.0 / static_cast<double>(k));
    DenseVector grad(k), trial(k);
    double best_kkt = std::numeric_limits<double>::infinity();
    DenseVector best_theta = out.theta;
    for (std::size_t it = 0; it < max_iters; ++it) {
        for (std::size_t i = 0; i < k; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += gram[i * k + j] * out.theta[j];
            grad[i] = 2.0 * (s - h[i]);
        }
        for (std::size_t i = 0; i < k; ++i) trial[i] = out.theta[i] - step * grad[i];
        trial = project_onto_probability_simplex(std::move(trial));
        double kkt = 0.0;
        for (std::size_t i = 0; i < k; ++i) kkt = std::max(kkt, std::fabs(trial[i] - out.theta[i]));
        out.theta = trial;
        out.iterations = it + 1;
        if (kkt < best_kkt) {
            best_kkt = kkt;
            best_theta = out.theta;
        }
        if (kkt < kkt_tol) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged) out.theta = best_theta;
    out.kkt_residual = best_kkt;
    double res2 = 0.0;
    for (std::size_t c = 0; c < v; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += out.theta[i] * topics[i][c];
        const double d = s - point[c];
        res2 += d * d;
    }
    out.residual = std::sqrt(res2);
    return out;
}

/// Held-out perplexity with projection-based topic proportions:
///   q_m = (1 - smoothing) * sum_k theta_mk beta_k + smoothing / V,
///   exp(-sum_m sum_v w_mv log q_mv / sum_m N_m).
/// A zero q at a positive count with smoothing 0 yields +infinity, reported,
/// not thrown.
inline double perplexity(const BagOfWords& held_out, const std::vector<DenseVector>& topics,
                         double smoothing = 1e-9) {
    if (smoothing < 0.0) throw std::invalid_argument("perplexity: smoothing must be >= 0");
    if (topics.empty()) throw std::invalid_argument("perplexity: no topics");
    const std::size_t v = held_out.vocab_size;
    for (const auto& t : topics)
        if (t.size() != v) throw std::invalid_argument("perplexity: dimension mismatch");
    const std::size_t k = topics.size();
    double log_sum = 0.0;
    double token_count = 0.0;
    DenseVector wbar(v);
    for (std::size_t m = 0; m < held_out.n_docs; ++m) {
        std::fill(wbar.begin(), wbar.end(), 0.0);
        const double inv_n = 1.0 / static_cast<double>(held_out.doc_lengths[m]);
        for (const auto& [w, c] : held_out.counts[m]) wbar[w] = static_cast<double>(c) * inv_n;
        const auto proj = project_to_simplex(wbar, topics);
        for (const auto& [w, c] : held_out.counts[m]) {
            double q = 0.0;
            for (std::size_t j = 0; j < k; ++j) q += proj.theta[j] * topics[j][w];
            q = (1.0 - smoothing) * q + smoothing / static_cast<double>(v);
            if (!(q > 0.0)) return std::numeric_limits<double>::infinity();
            log_sum += static_cast<double>(c) * std::log(q);
        }
        token_count += static_cast<double>(held_out.doc_lengths[m]);
    }
    if (token_count == 0.0) throw std::invalid_argument("perplexity: empty corpus");
    return std::exp(-log_sum / token_count);
}

}  // namespace cosac
