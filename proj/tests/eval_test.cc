#include "cosac/eval.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cosac/rng.hpp"
#include "cosac/serialize.hpp"
#include "cosac/synth.hpp"
#include "oracles.hpp"

using namespace cosac;

namespace {

std::vector<DenseVector> random_topics(std::size_t k, std::size_t v, Rng& rng, double eta = 0.5) {
    std::vector<double> e(v, eta);
    std::vector<DenseVector> topics(k, DenseVector(v));
    for (auto& t : topics) rng.dirichlet(e, t);
    return topics;
}

double euclid(const DenseVector& a, const DenseVector& b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    return std::sqrt(s);
}

}  // namespace

TEST(MinMatching, PermutedTruthGivesZero) {
    Rng rng(1);
    const auto topics = random_topics(5, 12, rng);
    std::vector<DenseVector> shuffled = {topics[3], topics[0], topics[4], topics[1], topics[2]};
    const auto r = min_matching_distance(shuffled, topics);
    EXPECT_NEAR(r.distance, 0.0, 1e-12);
    EXPECT_NEAR(r.max_distance, 0.0, 1e-12);
    EXPECT_EQ(r.unmatched, 0u);
    // assignment is the permutation
    EXPECT_EQ(r.assignment[0], 3);
    EXPECT_EQ(r.assignment[1], 0);
}

TEST(MinMatching, SingletonAgainstPair) {
    const DenseVector e1 = {1, 0, 0};
    const DenseVector e2 = {0, 1, 0};
    DenseVector est = {1.1, 0, 0};
    double sum = 1.1;
    for (auto& x : est) x /= sum;
    const auto r = min_matching_distance({est}, {e1, e2});
    EXPECT_NEAR(r.distance, euclid(est, e1), 1e-14);
    EXPECT_EQ(r.unmatched, 1u);
    EXPECT_EQ(r.assignment[0], 0);
}

TEST(MinMatching, AgreesWithBruteForce) {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t ka = 2 + rng.next_u64() % 5;  // up to 6
        const std::size_t kb = ka + rng.next_u64() % 2;
        const auto a = random_topics(ka, 8, rng);
        const auto b = random_topics(kb, 8, rng);
        const auto r = min_matching_distance(a, b);
        std::vector<std::vector<double>> cost(std::min(ka, kb),
                                              std::vector<double>(std::max(ka, kb)));
        const auto& small = ka <= kb ? a : b;
        const auto& large = ka <= kb ? b : a;
        for (std::size_t i = 0; i < small.size(); ++i)
            for (std::size_t j = 0; j < large.size(); ++j) cost[i][j] = euclid(small[i], large[j]);
        const double brute = oracles::brute_force_assignment_cost(cost);
        EXPECT_NEAR(r.distance * static_cast<double>(small.size()), brute, 1e-9);
    }
}

TEST(MinMatching, PremetricProperties) {
    Rng rng(3);
    const auto a = random_topics(4, 10, rng);
    const auto b = random_topics(4, 10, rng);
    const auto ab = min_matching_distance(a, b);
    const auto ba = min_matching_distance(b, a);
    EXPECT_NEAR(ab.distance, ba.distance, 1e-12);
    EXPECT_NEAR(ab.max_distance, ba.max_distance, 1e-12);
    EXPECT_GT(ab.distance, 0.0);  // distinct random sets
    // permutation invariance in both arguments
    std::vector<DenseVector> pa = {a[2], a[0], a[1], a[3]};
    std::vector<DenseVector> pb = {b[1], b[3], b[0], b[2]};
    EXPECT_NEAR(min_matching_distance(pa, pb).distance, ab.distance, 1e-12);
    // zero iff equal as multisets
    EXPECT_NEAR(min_matching_distance(pa, a).distance, 0.0, 1e-15);
    EXPECT_THROW(min_matching_distance({}, a), std::invalid_argument);
    EXPECT_THROW(min_matching_distance(a, {{0.5, 0.5}}), std::invalid_argument);
}

TEST(MinMatching, OptimalAgainstRandomPermutations) {
    Rng rng(4);
    const auto a = random_topics(7, 9, rng);
    const auto b = random_topics(7, 9, rng);
    const auto r = min_matching_distance(a, b);
    const double solver_total = r.distance * 7.0;
    std::vector<std::size_t> perm(7);
    for (std::size_t i = 0; i < 7; ++i) perm[i] = i;
    for (int t = 0; t < 1000; ++t) {
        for (std::size_t i = 7; i > 1; --i) std::swap(perm[i - 1], perm[rng.next_u64() % i]);
        double total = 0.0;
        for (std::size_t i = 0; i < 7; ++i) total += euclid(a[i], b[perm[i]]);
        EXPECT_GE(total, solver_total - 1e-10);
    }
}

TEST(ProjectToSimplex, VertexAndMidpoint) {
    Rng rng(5);
    const auto topics = random_topics(4, 12, rng);
    for (std::size_t j = 0; j < 4; ++j) {
        const auto p = project_to_simplex(topics[j], topics);
        ASSERT_TRUE(p.converged);
        for (std::size_t k = 0; k < 4; ++k)
            EXPECT_NEAR(p.theta[k], k == j ? 1.0 : 0.0, 1e-6);
        EXPECT_LT(p.residual, 1e-7);
    }
    DenseVector mid(12);
    for (std::size_t c = 0; c < 12; ++c) mid[c] = 0.5 * (topics[0][c] + topics[1][c]);
    const auto p = project_to_simplex(mid, topics);
    ASSERT_TRUE(p.converged);
    EXPECT_NEAR(p.theta[0], 0.5, 1e-6);
    EXPECT_NEAR(p.theta[1], 0.5, 1e-6);
    EXPECT_NEAR(p.theta[2], 0.0, 1e-8);
    EXPECT_NEAR(p.theta[3], 0.0, 1e-8);
}

TEST(ProjectToSimplex, MatchesGridSearchOnTriangle) {
    Rng rng(6);
    const auto topics = random_topics(3, 6, rng);
    for (int trial = 0; trial < 10; ++trial) {
        DenseVector point(6);
        for (auto& x : point) x = rng.next_double();
        const auto p = project_to_simplex(point, topics);
        ASSERT_TRUE(p.converged);
        // 1e-3 grid over the triangle
        double best = 1e18;
        DenseVector best_theta(3);
        for (int i = 0; i <= 1000; ++i) {
            for (int j = 0; j <= 1000 - i; ++j) {
                const double t0 = i / 1000.0, t1 = j / 1000.0, t2 = 1.0 - t0 - t1;
                double r2 = 0.0;
                for (std::size_t c = 0; c < 6; ++c) {
                    const double d =
                        t0 * topics[0][c] + t1 * topics[1][c] + t2 * topics[2][c] - point[c];
                    r2 += d * d;
                }
                if (r2 < best) {
                    best = r2;
                    best_theta = {t0, t1, t2};
                }
            }
        }
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(p.theta[k], best_theta[k], 2e-3);
        EXPECT_LE(p.residual, std::sqrt(best) + 1e-9);
    }
}

TEST(ProjectToSimplex, IdempotentAndBeatsRandomBaseline) {
    Rng rng(7);
    const auto topics = random_topics(5, 15, rng);
    DenseVector point(15);
    for (auto& x : point) x = rng.next_double();
    const auto p = project_to_simplex(point, topics);
    ASSERT_TRUE(p.converged);
    // reconstruct and re-project: same theta
    DenseVector recon(15, 0.0);
    for (std::size_t k = 0; k < 5; ++k)
        for (std::size_t c = 0; c < 15; ++c) recon[c] += p.theta[k] * topics[k][c];
    const auto p2 = project_to_simplex(recon, topics);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(p2.theta[k], p.theta[k], 1e-8);
    // no Dirichlet-sampled candidate does better
    std::vector<double> ones(5, 1.0);
    DenseVector cand(5);
    for (int t = 0; t < 10000; ++t) {
        rng.dirichlet(ones, cand);
        double r2 = 0.0;
        for (std::size_t c = 0; c < 15; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < 5; ++k) s += cand[k] * topics[k][c];
            r2 += (s - point[c]) * (s - point[c]);
        }
        EXPECT_GE(std::sqrt(r2), p.residual - 1e-9);
    }
}

TEST(Perplexity, UniformSingleTopicClosedForm) {
    // uniform truth over V=4 with exactly uniform counts: perplexity = 4
    std::istringstream in("1\n4\n4\n1 1 2\n1 2 2\n1 3 2\n1 4 2\n");
    const auto bow = load_uci_bow(in);
    const std::vector<DenseVector> topics = {{0.25, 0.25, 0.25, 0.25}};
    EXPECT_NEAR(perplexity(bow, topics, 0.0), 4.0, 1e-9);
}

TEST(Perplexity, WordOutsideTopicSupportIsInfinite) {
    // point-mass topics cover words 1 and 2 only; a document using word 3 has
    // zero likelihood at smoothing 0 (with the full identity basis the
    // projection reproduces the document exactly, so perplexity stays finite)
    std::istringstream in("1\n3\n2\n1 1 1\n1 3 1\n");
    auto bow = load_uci_bow(in);
    const std::vector<DenseVector> two_masses = {{1, 0, 0}, {0, 1, 0}};
    EXPECT_TRUE(std::isinf(perplexity(bow, two_masses, 0.0)));
    EXPECT_TRUE(std::isfinite(perplexity(bow, two_masses, 1e-9)));
    const std::vector<DenseVector> identity = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    EXPECT_TRUE(std::isfinite(perplexity(bow, identity, 0.0)));
}

TEST(Perplexity, TrueTopicsBeatRandomAndShrunkOnes) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        LdaSpec spec;
        spec.n_topics = 4;
        spec.vocab_size = 30;
        spec.n_docs = 120;
        spec.doc_lengths = {60};
        spec.alpha = {0.3};
        spec.eta = {0.4};
        spec.seed = 100 + seed;
        const auto s = sample_lda(spec);
        const double truth_perp = perplexity(s.bow, s.truth.topics);
        Rng rng(500 + seed);
        const auto random = random_topics(4, 30, rng, 0.4);
        EXPECT_LT(truth_perp, perplexity(s.bow, random)) << "seed " << seed;

        // topics shrunk halfway to their centroid describe the corpus worse
        DenseVector centroid(30, 0.0);
        for (const auto& t : s.truth.topics)
            for (std::size_t c = 0; c < 30; ++c) centroid[c] += t[c] / 4.0;
        auto shrunk = s.truth.topics;
        for (auto& t : shrunk)
            for (std::size_t c = 0; c < 30; ++c) t[c] = 0.5 * (t[c] + centroid[c]);
        EXPECT_LE(truth_perp, perplexity(s.bow, shrunk)) << "seed " << seed;
    }
}

TEST(Serialize, TopicEstimateJsonRoundTrip) {
    TopicEstimate est;
    est.k_hat = 2;
    est.omega = 0.6;
    est.norm_threshold = 0.125;
    est.outlier_fraction = 0.001;
    est.topics = {{0.5, 0.25, 0.25}, {0.125, 0.125, 0.75}};
    est.radii = {0.5, 0.75};
    est.directions = {{1, 0, 0}, {0, 0, 1}};
    est.cone_cardinalities = {10, 20};
    est.rejected_cones = 3;
    const auto j = topic_estimate_to_json(est);
    const auto back = topic_estimate_from_json(j);
    EXPECT_EQ(back.k_hat, est.k_hat);
    EXPECT_EQ(back.topics, est.topics);
    EXPECT_EQ(back.radii, est.radii);
    EXPECT_EQ(back.cone_cardinalities, est.cone_cardinalities);
    EXPECT_EQ(back.rejected_cones, est.rejected_cones);
    EXPECT_DOUBLE_EQ(back.omega, est.omega);
    EXPECT_DOUBLE_EQ(back.norm_threshold, est.norm_threshold);
}

TEST(Serialize, GroundTruthJsonRoundTrip) {
    GroundTruth truth;
    truth.topics = {{0.5, 0.5}, {0.25, 0.75}};
    truth.proportions = {{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}};
    truth.doc_distributions = {{0.5, 0.5}, {0.375, 0.625}, {0.25, 0.75}};
    const auto j = ground_truth_to_json(truth);
    const auto back = ground_truth_from_json(j);
    EXPECT_EQ(back.topics, truth.topics);
    EXPECT_EQ(back.proportions, truth.proportions);
    ASSERT_EQ(back.doc_distributions.size(), 3u);
    for (std::size_t m = 0; m < 3; ++m)
        for (std::size_t c = 0; c < 2; ++c)
            EXPECT_NEAR(back.doc_distributions[m][c], truth.doc_distributions[m][c], 1e-15);
}
