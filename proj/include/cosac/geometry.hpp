// Simplex geometry: cones, incenter/inradius via Cayley-Menger determinants,
// and the coverage-bound calculators used to pick the cone aperture.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cosac/common.hpp"
#include "cosac/incomplete_beta.hpp"
#include "cosac/rng.hpp"

namespace cosac {

/// Angular (cosine) distance 1 - cos(u, v), in [0, 2].
inline double cosine_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine_distance: size mismatch");
    const double nu = l2_norm(u);
    const double nv = l2_norm(v);
    if (nu == 0.0 || nv == 0.0)
        throw std::domain_error("cosine_distance: zero-norm vector (degenerate centered point)");
    const double c = dot(u, v) / (nu * nv);
    return 1.0 - std::clamp(c, -1.0, 1.0);
}

/// Open cone membership: cosine_distance(axis, point) < omega.
/// A zero-norm point has no direction and belongs to no cone; callers cover
/// the center with the spherical ball instead.
inline bool cone_contains(std::span<const double> axis, double omega,
                          std::span<const double> point) {
    if (l2_norm(axis) == 0.0) throw std::invalid_argument("cone_contains: zero-norm axis");
    if (l2_norm(point) == 0.0) return false;
    return cosine_distance(axis, point) < omega;
}

struct DegenerateSimplexError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A simplex centered at a caller-supplied point, with its intrinsic incenter
/// and inradius. inradius <= r_min holds when the centering point is the
/// incenter itself; the struct never substitutes one center for another.
struct SimplexGeometry {
    std::size_t n_vertices = 0;  // K
    std::size_t dim = 0;         // ambient dimension V
    std::vector<DenseVector> vertices;    // centered vertices b_k = vertex_k - center
    std::vector<DenseVector> directions;  // unit b_k / ||b_k||
    std::vector<double> radii;            // R_k = ||b_k||
    std::vector<std::vector<double>> edge_lengths;  // a[i][k], symmetric, zero diagonal
    DenseVector incenter_offset;  // incenter - center
    double inradius = 0.0;
    double r_max = 0.0, r_min = 0.0;
    double a_max = 0.0, a_min = 0.0;

    double cos_angle(std::size_t i, std::size_t k) const {
        const double c = dot(vertices[i], vertices[k]) / (radii[i] * radii[k]);
        return std::clamp(c, -1.0, 1.0);
    }
};

namespace detail {

// Squared d-volume of the simplex on `idx` (d = idx.size() - 1) from squared
// distances, via the Cayley-Menger determinant. Elimination runs in long
// double with partial pivoting.
inline long double cayley_menger_vol2(std::span<const std::size_t> idx,
                                      const std::vector<std::vector<double>>& dist2) {
    const std::size_t n = idx.size();
    const std::size_t m = n + 1;
    std::vector<long double> a(m * m, 0.0L);
    for (std::size_t j = 1; j < m; ++j) {
        a[j] = 1.0L;
        a[j * m] = 1.0L;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a[(i + 1) * m + (j + 1)] = dist2[idx[i]][idx[j]];

    long double det = 1.0L;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::fabs(a[r * m + col]) > std::fabs(a[piv * m + col])) piv = r;
        if (a[piv * m + col] == 0.0L) return 0.0L;
        if (piv != col) {
            for (std::size_t j = 0; j < m; ++j) std::swap(a[piv * m + j], a[col * m + j]);
            det = -det;
        }
        det *= a[col * m + col];
        for (std::size_t r = col + 1; r < m; ++r) {
            const long double f = a[r * m + col] / a[col * m + col];
            if (f == 0.0L) continue;
            for (std::size_t j = col; j < m; ++j) a[r * m + j] -= f * a[col * m + j];
        }
    }
    // vol_d^2 = (-1)^(d+1) / (2^d (d!)^2) * det, d = n - 1
    const std::size_t d = n - 1;
    long double fact = 1.0L;
    for (std::size_t i = 2; i <= d; ++i) fact *= static_cast<long double>(i);
    long double vol2 = det / (std::pow(2.0L, static_cast<long double>(d)) * fact * fact);
    if (n % 2 != 0) vol2 = -vol2;
    return vol2;
}

// Squared volume of the regular d-simplex with edge a: a^(2d) (d+1) / (2^d (d!)^2).
inline long double regular_simplex_vol2(std::size_t d, double edge) {
    long double fact = 1.0L;
    for (std::size_t i = 2; i <= d; ++i) fact *= static_cast<long double>(i);
    return std::pow(static_cast<long double>(edge) * edge, static_cast<long double>(d)) *
           static_cast<long double>(d + 1) /
           (std::pow(2.0L, static_cast<long double>(d)) * fact * fact);
}

}  // namespace detail

/// Builds the centered geometry of the (K-1)-simplex spanned by `vertices`.
/// The incenter is intrinsic: facet (K-2)-volumes F_k weight the vertices,
/// incenter = sum F_k vertex_k / sum F_k, inradius = (K-1) Vol / sum F_k.
/// Throws DegenerateSimplexError when the squared volume falls below 1e-20
/// relative to a regular simplex with edge a_max.
inline SimplexGeometry simplex_geometry(const std::vector<DenseVector>& vertices,
                                        const DenseVector& center) {
    const std::size_t k = vertices.size();
    if (k < 2) throw std::invalid_argument("simplex_geometry: need at least 2 vertices");
    const std::size_t v = center.size();
    // a (K-1)-simplex needs K-1 ambient dimensions
    if (k > v + 1) throw std::invalid_argument("simplex_geometry: more vertices than dimensions allow");
    for (const auto& x : vertices)
        if (x.size() != v) throw std::invalid_argument("simplex_geometry: dimension mismatch");

    SimplexGeometry g;
    g.n_vertices = k;
    g.dim = v;
    g.vertices.resize(k, DenseVector(v));
    g.radii.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < v; ++j) g.vertices[i][j] = vertices[i][j] - center[j];
        g.radii[i] = l2_norm(g.vertices[i]);
    }

    g.edge_lengths.assign(k, std::vector<double>(k, 0.0));
    std::vector<std::vector<double>> dist2(k, std::vector<double>(k, 0.0));
    g.a_max = 0.0;
    g.a_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < v; ++c) {
                const double d = g.vertices[i][c] - g.vertices[j][c];
                s += d * d;
            }
            dist2[i][j] = dist2[j][i] = s;
            const double len = std::sqrt(s);
            g.edge_lengths[i][j] = g.edge_lengths[j][i] = len;
            g.a_max = std::max(g.a_max, len);
            g.a_min = std::min(g.a_min, len);
        }
    }

    std::vector<std::size_t> all(k);
    for (std::size_t i = 0; i < k; ++i) all[i] = i;
    const long double vol2 = detail::cayley_menger_vol2(all, dist2);
    const long double scale = detail::regular_simplex_vol2(k - 1, g.a_max);
    if (!(vol2 > 1e-20L * scale))
        throw DegenerateSimplexError("simplex_geometry: affinely dependent vertices");
    const long double vol = std::sqrt(vol2);

    // Facet volumes; for K = 2 the facets are points with 0-volume 1.
    std::vector<long double> facet(k);
    long double facet_sum = 0.0L;
    for (std::size_t drop = 0; drop < k; ++drop) {
        std::vector<std::size_t> sub;
        sub.reserve(k - 1);
        for (std::size_t i = 0; i < k; ++i)
            if (i != drop) sub.push_back(i);
        const long double f2 = detail::cayley_menger_vol2(sub, dist2);
        facet[drop] = f2 > 0.0L ? std::sqrt(f2) : 0.0L;
        facet_sum += facet[drop];
    }
    if (!(facet_sum > 0.0L))
        throw DegenerateSimplexError("simplex_geometry: degenerate facets");

    g.inradius = static_cast<double>(static_cast<long double>(k - 1) * vol / facet_sum);
    g.incenter_offset.assign(v, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const double w = static_cast<double>(facet[i] / facet_sum);
        for (std::size_t c = 0; c < v; ++c) g.incenter_offset[c] += w * g.vertices[i][c];
    }

    g.r_max = *std::max_element(g.radii.begin(), g.radii.end());
    g.r_min = *std::min_element(g.radii.begin(), g.radii.end());
    for (std::size_t i = 0; i < k; ++i)
        if (g.radii[i] == 0.0)
            throw DegenerateSimplexError("simplex_geometry: vertex coincides with center");
    g.directions.resize(k, DenseVector(v));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t c = 0; c < v; ++c) g.directions[i][c] = g.vertices[i][c] / g.radii[i];
    return g;
}

/// Regular (K-1)-simplex: unit basis vectors of R^K centered at their mean.
inline SimplexGeometry regular_simplex(std::size_t k) {
    if (k < 2) throw std::invalid_argument("regular_simplex: need K >= 2");
    std::vector<DenseVector> vertices(k, DenseVector(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) vertices[i][i] = 1.0;
    DenseVector center(k, 1.0 / static_cast<double>(k));
    return simplex_geometry(vertices, center);
}

/// Coverage bounds. omega2 is the loose aperture ceiling
/// max{a_max^2/(2 R_max^2), max angular distance}; omega2_proof carries the
/// conservative a_min^2/(2 R_max^2) variant. angular_min is the threshold
/// below which every cone holds exactly one vertex; Monte-Carlo coverage
/// arbitrates between the variants in tests.
struct OmegaBounds {
    double omega1 = std::numeric_limits<double>::quiet_NaN();
    double omega2 = std::numeric_limits<double>::quiet_NaN();
    double omega2_proof = std::numeric_limits<double>::quiet_NaN();
    double angular_min = std::numeric_limits<double>::quiet_NaN();
    double angular_max = std::numeric_limits<double>::quiet_NaN();
    double omega3 = std::numeric_limits<double>::quiet_NaN();
    double omega_lambda = std::numeric_limits<double>::quiet_NaN();
    double c_lambda = std::numeric_limits<double>::quiet_NaN();
};

inline OmegaBounds conic_aperture_bounds(const SimplexGeometry& g) {
    OmegaBounds b;
    b.omega1 = 1.0 - g.inradius / g.r_max;
    double ang_min = std::numeric_limits<double>::infinity();
    double ang_max = 0.0;
    for (std::size_t i = 0; i < g.n_vertices; ++i) {
        for (std::size_t k = i + 1; k < g.n_vertices; ++k) {
            const double d = 1.0 - g.cos_angle(i, k);
            ang_min = std::min(ang_min, d);
            ang_max = std::max(ang_max, d);
        }
    }
    b.angular_min = ang_min;
    b.angular_max = ang_max;
    const double stmt = g.a_max * g.a_max / (2.0 * g.r_max * g.r_max);
    const double proof = g.a_min * g.a_min / (2.0 * g.r_max * g.r_max);
    b.omega2 = std::max(stmt, ang_max);
    b.omega2_proof = proof;
    return b;
}

/// Conventional closed-form equilateral range (1 - 1/sqrt(K-1), 1 + 1/(K-1)),
/// kept for display/reference. Note the geometric lower bound 1 - r/R_max of
/// a regular simplex is the larger value 1 - 1/(K-1).
inline std::pair<double, double> equilateral_aperture_range(std::size_t k) {
    if (k < 2) throw std::invalid_argument("equilateral_aperture_range: need K >= 2");
    const double km1 = static_cast<double>(k - 1);
    return {1.0 - 1.0 / std::sqrt(km1), 1.0 + 1.0 / km1};
}

namespace detail {

// Angle at vertex k between the direction back to the center and the edge
// toward vertex i: angle(b_k, b_k - b_i).
inline double vertex_edge_cos(const SimplexGeometry& g, std::size_t i, std::size_t k) {
    double num = 0.0;
    for (std::size_t c = 0; c < g.dim; ++c)
        num += g.vertices[k][c] * (g.vertices[k][c] - g.vertices[i][c]);
    const double den = g.radii[k] * g.edge_lengths[i][k];
    if (den == 0.0) throw DegenerateSimplexError("vertex_edge_cos: zero-length edge");
    return std::clamp(num / den, -1.0, 1.0);
}

}  // namespace detail

/// Smallest angle(b_k, b_k - b_i) over ordered vertex pairs; the tightest
/// admissible choice of d for the cap-ratio bound.
inline double min_vertex_edge_angle(const SimplexGeometry& g) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.n_vertices; ++k)
        for (std::size_t i = 0; i < g.n_vertices; ++i)
            if (i != k) best = std::min(best, std::acos(detail::vertex_edge_cos(g, i, k)));
    return best;
}

/// Ball-assisted aperture bound:
///   omega3 = 1 - min{ min_{i,k} [ R_k sin^2(psi)/R + cos(psi) sqrt(1 - R_k^2 sin^2(psi)/R^2) ], 1 }
/// where psi is the vertex angle angle(b_k, b_k - b_i). The square-root
/// argument clamps at 0 when the ball cannot reach the edge; with every pair
/// in that regime the inner min exceeds 1 and omega3 collapses to 0.
inline double omega3(const SimplexGeometry& g, double ball_radius) {
    if (!(ball_radius > 0.0)) throw std::domain_error("omega3: ball radius must be positive");
    double inner = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.n_vertices; ++k) {
        for (std::size_t i = 0; i < g.n_vertices; ++i) {
            if (i == k) continue;
            const double cos_psi = detail::vertex_edge_cos(g, i, k);
            const double sin2_psi = std::max(0.0, 1.0 - cos_psi * cos_psi);
            const double s = g.radii[k] * std::sqrt(sin2_psi) / ball_radius;
            const double root = std::sqrt(std::max(0.0, 1.0 - s * s));
            const double expr = g.radii[k] * sin2_psi / ball_radius + cos_psi * root;
            inner = std::min(inner, expr);
        }
    }
    return std::clamp(1.0 - std::min(inner, 1.0), 0.0, 1.0);
}

/// Edge-cut ratio c from the aperture omega and vertex angle d:
///   c = [ 2 sqrt(1 - r^2/R_max^2) (sin(d) cot(arccos(1-omega)) + cos(d)) ]^-1
inline double c_lambda_from_omega(double omega, const SimplexGeometry& g, double d) {
    if (!(omega > 0.0) || omega >= 1.0)
        throw std::domain_error("c_lambda_from_omega: omega must lie in (0, 1)");
    constexpr double half_pi = 1.5707963267948966;
    if (!(d > 0.0) || !(d < half_pi))
        throw std::invalid_argument("c_lambda_from_omega: d must lie in (0, pi/2)");
    const double one_minus = 1.0 - omega;
    const double cot = one_minus / std::sqrt(1.0 - one_minus * one_minus);
    const double ratio = g.inradius / g.r_max;
    const double front = 2.0 * std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
    return 1.0 / (front * (std::sin(d) * cot + std::cos(d)));
}

/// Dirichlet mass of the simplicial cap at vertex k with edge-cut ratio c:
/// the Beta(alpha_k, sum_{i != k} alpha_i) upper tail above 1 - c.
inline double cap_mass_lower_bound(double c, std::span<const double> alpha, std::size_t k) {
    if (!(c > 0.0) || !(c < 1.0))
        throw std::domain_error("cap_mass_lower_bound: c must lie in (0, 1)");
    if (k >= alpha.size()) throw std::invalid_argument("cap_mass_lower_bound: bad topic index");
    double rest = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (!(alpha[i] > 0.0))
            throw std::domain_error("cap_mass_lower_bound: alpha must be positive");
        if (i != k) rest += alpha[i];
    }
    return 1.0 - regularized_incomplete_beta(alpha[k], rest, 1.0 - c);
}

/// Aggregate report: the conic bounds plus omega3 at the given ball radius and
/// the cap ratio implied by `omega` (d defaults to the tightest vertex angle).
inline OmegaBounds compute_omega_bounds(const SimplexGeometry& g, double ball_radius,
                                        double omega) {
    OmegaBounds b = conic_aperture_bounds(g);
    if (ball_radius > 0.0) b.omega3 = omega3(g, ball_radius);
    if (omega > 0.0 && omega < 1.0) {
        b.omega_lambda = omega;
        b.c_lambda = c_lambda_from_omega(omega, g, min_vertex_edge_angle(g));
    }
    return b;
}

/// Number of geometry vertices inside each vertex-direction cone.
inline std::vector<std::size_t> vertices_per_cone(const SimplexGeometry& g, double omega) {
    std::vector<std::size_t> counts(g.n_vertices, 0);
    for (std::size_t k = 0; k < g.n_vertices; ++k)
        for (std::size_t i = 0; i < g.n_vertices; ++i)
            if (cone_contains(g.directions[k], omega, g.vertices[i])) ++counts[k];
    return counts;
}

namespace detail {

template <class Visit>
void monte_carlo_points(const SimplexGeometry& g, std::size_t n_samples,
                        std::span<const double> alpha, std::uint64_t seed, std::size_t threads,
                        Visit&& visit) {
    if (alpha.size() != g.n_vertices)
        throw std::invalid_argument("monte_carlo: alpha size must match vertex count");
    constexpr std::uint64_t kTag = 0x636f7665726167ULL;  // stream tag
    const std::size_t k = g.n_vertices;
    const std::size_t v = g.dim;
    parallel_for(n_samples, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> theta(k);
        std::vector<double> point(v);
        for (std::size_t s = begin; s < end; ++s) {
            Rng rng(seed, s, kTag);
            rng.dirichlet(alpha, theta);
            std::fill(point.begin(), point.end(), 0.0);
            for (std::size_t j = 0; j < k; ++j) {
                const double t = theta[j];
                if (t == 0.0) continue;
                const auto& b = g.vertices[j];
                for (std::size_t c = 0; c < v; ++c) point[c] += t * b[c];
            }
            visit(s, point);
        }
    });
}

}  // namespace detail

/// Norms of the Dirichlet-sampled centered points; same streams as
/// monte_carlo_coverage so a quantile of these is consistent with a coverage
/// run at the same seed.
inline std::vector<double> monte_carlo_point_norms(const SimplexGeometry& g,
                                                   std::size_t n_samples,
                                                   std::span<const double> alpha,
                                                   std::uint64_t seed, std::size_t threads = 0) {
    std::vector<double> norms(n_samples, 0.0);
    detail::monte_carlo_points(g, n_samples, alpha, seed, threads,
                               [&](std::size_t s, const std::vector<double>& p) {
                                   norms[s] = l2_norm(p);
                               });
    return norms;
}

/// Fraction of Dirichlet(alpha) samples of the simplex covered by the union
/// of the K vertex-direction cones and the centered ball. Deterministic for a
/// fixed seed regardless of thread count (per-sample streams).
inline double monte_carlo_coverage(const SimplexGeometry& g, double omega, double ball_radius,
                                   std::size_t n_samples, std::span<const double> alpha,
                                   std::uint64_t seed, std::size_t threads = 0) {
    if (n_samples == 0) return 1.0;  // vacuous coverage
    std::atomic<std::size_t> covered{0};
    const std::size_t k = g.n_vertices;
    detail::monte_carlo_points(
        g, n_samples, alpha, seed, threads, [&](std::size_t, const std::vector<double>& p) {
            const double norm = l2_norm(p);
            bool in = norm <= ball_radius;
            if (!in && norm > 0.0) {
                for (std::size_t j = 0; j < k; ++j) {
                    const double c = dot(g.directions[j], p) / norm;
                    if (1.0 - std::clamp(c, -1.0, 1.0) < omega) {
                        in = true;
                        break;
                    }
                }
            }
            if (in) covered.fetch_add(1, std::memory_order_relaxed);
        });
    return static_cast<double>(covered.load()) / static_cast<double>(n_samples);
}

}  // namespace cosac
