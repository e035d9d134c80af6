// Independent oracles used by the unit and acceptance suites. Everything here
// deliberately avoids the library's evaluation paths: quadrature instead of
// the continued fraction, permutation enumeration instead of the assignment
// solver, closed forms instead of Cayley-Menger.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "cosac/common.hpp"
#include "cosac/geometry.hpp"
#include "cosac/rng.hpp"

namespace oracles {

// ----------------------------------------------------------- quadrature

inline double simpson(const std::function<double(double)>& f, double a, double b) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth) {
    const double whole = simpson(f, a, b);
    const double m = 0.5 * (a + b);
    const double left = simpson(f, a, m);
    const double right = simpson(f, m, b);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, 0.5 * tol, depth - 1);
}

// Integral of t^(a-1) (1-t)^(b-1) over [lo, hi] with endpoint singularities
// removed by the substitutions u = t^a (near 0) and u = (1-t)^b (near 1).
inline double beta_kernel_integral(double a, double b, double lo, double hi) {
    constexpr double tol = 1e-12;
    constexpr int depth = 48;
    double total = 0.0;
    const double mid = std::clamp(0.5, lo, hi);
    if (lo < mid) {
        // u = t^a, dt = (1/a) u^(1/a - 1) du, integrand -> (1-u^(1/a))^(b-1) / a
        const auto g = [a, b](double u) {
            const double t = std::pow(u, 1.0 / a);
            return std::pow(1.0 - t, b - 1.0) / a;
        };
        total += adaptive_simpson(g, std::pow(lo, a), std::pow(mid, a), tol, depth);
    }
    if (mid < hi) {
        // u = (1-t)^b
        const auto g = [a, b](double u) {
            const double t = 1.0 - std::pow(u, 1.0 / b);
            return std::pow(t, a - 1.0) / b;
        };
        total += adaptive_simpson(g, std::pow(1.0 - hi, b), std::pow(1.0 - mid, b), tol, depth);
    }
    return total;
}

/// P(Beta(a, b) > 1 - c) by quadrature alone (numerator and normalizer).
inline double beta_upper_tail_quadrature(double a, double b, double c) {
    const double numer = beta_kernel_integral(a, b, 1.0 - c, 1.0);
    const double denom = beta_kernel_integral(a, b, 0.0, 1.0);
    return numer / denom;
}

// ------------------------------------------------------ brute assignment

// Minimal total cost over all injective row -> column maps, rows <= cols.
inline double brute_force_assignment_cost(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    const std::size_t m = cost.front().size();
    std::vector<std::size_t> cols(m);
    std::iota(cols.begin(), cols.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    // permute all columns, read the first n as the assignment
    std::sort(cols.begin(), cols.end());
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += cost[i][cols[i]];
        best = std::min(best, c);
    } while (std::next_permutation(cols.begin(), cols.end()));
    return best;
}

// ------------------------------------------------- random geometries

/// Random simplex with angular separation about its own incenter: perturbed
/// orthonormal directions with jittered radii, re-centered at the incenter and
/// rejected until all pairwise cos(b_i, b_k) <= 0.
inline cosac::SimplexGeometry random_angular_separated_geometry(std::size_t k, std::size_t v,
                                                                cosac::Rng& rng) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        // orthonormal basis from a Gaussian matrix (Gram-Schmidt)
        std::vector<cosac::DenseVector> basis(k, cosac::DenseVector(v));
        for (auto& col : basis)
            for (auto& x : col) x = rng.normal();
        bool ok = true;
        for (std::size_t i = 0; i < k && ok; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                const double d = cosac::dot(basis[i], basis[j]);
                for (std::size_t c = 0; c < v; ++c) basis[i][c] -= d * basis[j][c];
            }
            const double n = cosac::l2_norm(basis[i]);
            if (n < 1e-8) {
                ok = false;
                break;
            }
            for (auto& x : basis[i]) x /= n;
        }
        if (!ok) continue;
        std::vector<cosac::DenseVector> vertices(k, cosac::DenseVector(v));
        for (std::size_t i = 0; i < k; ++i) {
            const double radius = 0.8 + 0.4 * rng.next_double();
            for (std::size_t c = 0; c < v; ++c) {
                const double jitter = 0.08 * rng.normal() / std::sqrt(static_cast<double>(v));
                vertices[i][c] = radius * (basis[i][c] + jitter);
            }
        }
        try {
            const cosac::DenseVector zero(v, 0.0);
            const auto pre = cosac::simplex_geometry(vertices, zero);
            const auto geom = cosac::simplex_geometry(vertices, pre.incenter_offset);
            bool separated = true;
            for (std::size_t i = 0; i < k && separated; ++i)
                for (std::size_t j = i + 1; j < k; ++j)
                    if (geom.cos_angle(i, j) > 0.0) {
                        separated = false;
                        break;
                    }
            if (separated) return geom;
        } catch (const cosac::DegenerateSimplexError&) {
            continue;
        }
    }
    throw std::runtime_error("random_angular_separated_geometry: no sample after 200 attempts");
}

}  // namespace oracles
