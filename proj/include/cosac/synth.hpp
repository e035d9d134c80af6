// Synthetic LDA corpora with known ground truth, plus the multinomial
// variance check used to size document-length noise.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosac/common.hpp"
#include "cosac/corpus.hpp"
#include "cosac/rng.hpp"

namespace cosac {

struct LdaSpec {
    std::size_t n_topics = 1;   // K
    std::size_t vocab_size = 2; // V
    std::size_t n_docs = 1;     // M
    std::vector<std::uint32_t> doc_lengths{1};  // size 1 => uniform N, or size M
    std::vector<double> alpha{1.0};  // size 1 => symmetric, or size K
    std::vector<double> eta{1.0};    // size 1 => symmetric, or size V
    std::uint64_t seed = 0;

    void validate() const {
        if (n_topics < 1 || vocab_size < 2 || n_docs < 1)
            throw std::invalid_argument("LdaSpec: counts must be positive (and V >= 2)");
        if (doc_lengths.size() != 1 && doc_lengths.size() != n_docs)
            throw std::invalid_argument("LdaSpec: doc_lengths must have size 1 or M");
        for (auto n : doc_lengths)
            if (n < 1) throw std::invalid_argument("LdaSpec: document lengths must be >= 1");
        if (alpha.size() != 1 && alpha.size() != n_topics)
            throw std::invalid_argument("LdaSpec: alpha must have size 1 or K");
        if (eta.size() != 1 && eta.size() != vocab_size)
            throw std::invalid_argument("LdaSpec: eta must have size 1 or V");
        for (double a : alpha)
            if (!(a > 0.0)) throw std::invalid_argument("LdaSpec: alpha must be positive");
        for (double e : eta)
            if (!(e > 0.0)) throw std::invalid_argument("LdaSpec: eta must be positive");
    }

    std::vector<double> expanded_alpha() const {
        return alpha.size() == 1 ? std::vector<double>(n_topics, alpha[0]) : alpha;
    }
    std::vector<double> expanded_eta() const {
        return eta.size() == 1 ? std::vector<double>(vocab_size, eta[0]) : eta;
    }
    std::uint32_t doc_length(std::size_t m) const {
        return doc_lengths.size() == 1 ? doc_lengths[0] : doc_lengths[m];
    }
};

struct GroundTruth {
    std::vector<DenseVector> topics;             // beta_k on the vocabulary simplex
    std::vector<DenseVector> proportions;        // theta_m on the topic simplex
    std::vector<DenseVector> doc_distributions;  // p_m = sum_k theta_mk beta_k
};

struct LdaSample {
    BagOfWords bow;
    GroundTruth truth;
};

namespace detail {

constexpr std::uint64_t kTopicStream = 0x746f70ULL;  // topic draws
constexpr std::uint64_t kDocStream = 0x646f63ULL;    // per-document draws

// theta/p/w for given topics; one RNG stream per document.
inline LdaSample sample_docs_from_topics(const LdaSpec& spec, std::vector<DenseVector> beta) {
    LdaSample out;
    const std::size_t k = spec.n_topics;
    const std::size_t v = spec.vocab_size;
    const std::size_t m = spec.n_docs;
    const auto alpha = spec.expanded_alpha();
    out.truth.topics = std::move(beta);
    out.truth.proportions.assign(m, DenseVector(k));
    out.truth.doc_distributions.assign(m, DenseVector(v));
    out.bow.vocab_size = v;
    out.bow.counts.resize(m);
    out.bow.doc_lengths.resize(m);
    std::vector<std::uint32_t> counts(v);
    for (std::size_t d = 0; d < m; ++d) {
        Rng rng(spec.seed, d, kDocStream);
        auto& theta = out.truth.proportions[d];
        rng.dirichlet(alpha, theta);
        auto& p = out.truth.doc_distributions[d];
        for (std::size_t j = 0; j < k; ++j) {
            const double t = theta[j];
            if (t == 0.0) continue;
            const auto& b = out.truth.topics[j];
            for (std::size_t c = 0; c < v; ++c) p[c] += t * b[c];
        }
        const std::uint32_t n = spec.doc_length(d);
        rng.multinomial(n, p, counts);
        auto& row = out.bow.counts[d];
        for (std::uint32_t w = 0; w < v; ++w)
            if (counts[w] > 0) row.emplace_back(w, counts[w]);
        out.bow.doc_lengths[d] = n;
    }
    out.bow.n_docs = m;
    return out;
}

inline std::vector<DenseVector> sample_topics(const LdaSpec& spec) {
    const auto eta = spec.expanded_eta();
    std::vector<DenseVector> beta(spec.n_topics, DenseVector(spec.vocab_size));
    for (std::size_t j = 0; j < spec.n_topics; ++j) {
        Rng rng(spec.seed, j, kTopicStream);
        rng.dirichlet(eta, beta[j]);
    }
    return beta;
}

}  // namespace detail

/// beta_k ~ Dir_V(eta), theta_m ~ Dir_K(alpha), p_m = sum theta beta,
/// w_m ~ Multinomial(N_m, p_m). Bit-deterministic given the seed.
inline LdaSample sample_lda(const LdaSpec& spec) {
    spec.validate();
    return detail::sample_docs_from_topics(spec, detail::sample_topics(spec));
}

/// Re-samples documents only, for externally supplied topics.
inline LdaSample sample_lda_from_topics(const LdaSpec& spec, std::vector<DenseVector> beta) {
    spec.validate();
    if (beta.size() != spec.n_topics)
        throw std::invalid_argument("sample_lda_from_topics: topic count mismatch");
    return detail::sample_docs_from_topics(spec, std::move(beta));
}

struct PlantedAnchorSample {
    BagOfWords bow;
    GroundTruth truth;
    std::vector<std::uint32_t> anchors;  // word k is the anchor of topic k
};

/// Draws topics as in sample_lda, then gives topic k exclusive ownership of
/// word k with probability anchor_mass (zero in every other topic), rescaling
/// the rest of the row to 1 - anchor_mass.
inline PlantedAnchorSample sample_planted_anchor_lda(const LdaSpec& spec, double anchor_mass) {
    spec.validate();
    if (!(anchor_mass > 0.0) || !(anchor_mass <= 1.0))
        throw std::invalid_argument("sample_planted_anchor_lda: anchor_mass must lie in (0, 1]");
    if (spec.vocab_size < 2 * spec.n_topics)
        throw std::invalid_argument("sample_planted_anchor_lda: requires V >= 2K");
    const std::size_t k = spec.n_topics;
    auto beta = detail::sample_topics(spec);
    for (std::size_t j = 0; j < k; ++j) {
        auto& row = beta[j];
        double rest = 0.0;
        for (std::size_t a = 0; a < k; ++a) row[a] = 0.0;  // anchors owned exclusively
        for (std::size_t c = k; c < row.size(); ++c) rest += row[c];
        const double target = 1.0 - anchor_mass;
        if (rest > 0.0 && target > 0.0) {
            const double f = target / rest;
            for (std::size_t c = k; c < row.size(); ++c) row[c] *= f;
        } else {
            for (std::size_t c = k; c < row.size(); ++c) row[c] = 0.0;
        }
        row[j] = anchor_mass;
        // renormalize exactly
        double sum = 0.0;
        for (double x : row) sum += x;
        for (auto& x : row) x /= sum;
    }
    auto sample = detail::sample_docs_from_topics(spec, std::move(beta));
    PlantedAnchorSample out;
    out.bow = std::move(sample.bow);
    out.truth = std::move(sample.truth);
    out.anchors.resize(k);
    for (std::uint32_t j = 0; j < k; ++j) out.anchors[j] = j;
    return out;
}

struct VarianceCheck {
    double empirical_mse = 0.0;
    double bound = 0.0;
    double std_error = 0.0;
};

/// Monte-Carlo check of E||w/N - p||^2 <= (1 - 1/V)/N over p drawn uniformly
/// on the simplex.
inline VarianceCheck multinomial_variance_check(std::size_t v, std::uint32_t n,
                                                std::size_t trials, std::uint64_t seed) {
    if (v < 1 || n < 1) throw std::invalid_argument("multinomial_variance_check: V, N >= 1");
    if (trials < 100) throw std::invalid_argument("multinomial_variance_check: trials >= 100");
    constexpr std::uint64_t kTrialStream = 0x766172ULL;
    std::vector<double> p(v);
    std::vector<double> ones(v, 1.0);
    std::vector<std::uint32_t> w(v);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(seed, t, kTrialStream);
        rng.dirichlet(ones, p);
        rng.multinomial(n, p, w);
        double err = 0.0;
        for (std::size_t c = 0; c < v; ++c) {
            const double d = static_cast<double>(w[c]) / static_cast<double>(n) - p[c];
            err += d * d;
        }
        sum += err;
        sum_sq += err * err;
    }
    VarianceCheck out;
    const double tn = static_cast<double>(trials);
    out.empirical_mse = sum / tn;
    const double var = std::max(0.0, sum_sq / tn - out.empirical_mse * out.empirical_mse);
    out.std_error = std::sqrt(var / tn);
    out.bound = (1.0 - 1.0 / static_cast<double>(v)) / static_cast<double>(n);
    return out;
}

}  // namespace cosac
