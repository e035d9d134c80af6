// Deterministic random streams and the exact samplers built on them.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace cosac {

// SplitMix64 with the initial state keyed by (seed, stream, substream).
// Streams are cheap to construct, so samplers key one stream per document,
// Monte-Carlo sample or topic and stay bit-deterministic under any parallel
// schedule.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0) {
        std::uint64_t h = 0x243f6a8885a308d3ULL;  // pi digits
        h = mix(h, seed);
        h = mix(h, stream);
        h = mix(h, substream);
        state_ = h;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return scramble(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1); rejects exact zeros.
    double next_open() {
        for (;;) {
            double u = next_double();
            if (u > 0.0) return u;
        }
    }

    /// Standard normal via the Marsaglia polar method (second value discarded).
    double normal() {
        for (;;) {
            const double u = 2.0 * next_double() - 1.0;
            const double v = 2.0 * next_double() - 1.0;
            const double s = u * u + v * v;
            if (s >= 1.0 || s == 0.0) continue;
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    /// Gamma(shape, 1) via Marsaglia-Tsang squeeze/rejection; the shape < 1
    /// case boosts a shape+1 draw with u^(1/shape), valid for all shape > 0.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::domain_error("gamma shape must be positive");
        if (shape < 1.0) {
            const double u = next_open();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Dirichlet(alpha) by normalized gamma draws.
    void dirichlet(std::span<const double> alpha, std::span<double> out) {
        if (alpha.size() != out.size() || alpha.empty())
            throw std::invalid_argument("dirichlet: size mismatch");
        double sum = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            out[i] = gamma(alpha[i]);
            sum += out[i];
        }
        if (!(sum > 0.0)) {
            // All gamma draws underflowed (tiny shapes); collapse deterministically.
            for (auto& x : out) x = 0.0;
            out[0] = 1.0;
            return;
        }
        for (auto& x : out) x /= sum;
    }

    /// Binomial(n, p), exact. Inversion from pmf(0); the complement trick keeps
    /// p <= 1/2 and recursive halving avoids pmf(0) underflow for large n.
    std::uint64_t binomial(std::uint64_t n, double p) {
        if (n == 0 || p <= 0.0) return 0;
        if (p >= 1.0) return n;
        if (p > 0.5) return n - binomial(n, 1.0 - p);
        if (static_cast<double>(n) * std::log1p(-p) < -700.0) {
            const std::uint64_t h = n / 2;
            return binomial(h, p) + binomial(n - h, p);
        }
        const double odds = p / (1.0 - p);
        double f = std::exp(static_cast<double>(n) * std::log1p(-p));  // pmf(0)
        double cdf = f;
        const double u = next_double();
        std::uint64_t k = 0;
        while (u > cdf && k < n) {
            ++k;
            f *= (static_cast<double>(n - k + 1) / static_cast<double>(k)) * odds;
            cdf += f;
        }
        return k;
    }

    /// Multinomial(n, probs) via the sequential conditional-binomial method:
    /// exact, O(probs.size() + n) expected work per call.
    void multinomial(std::uint64_t n, std::span<const double> probs, std::span<std::uint32_t> out) {
        if (probs.size() != out.size() || probs.empty())
            throw std::invalid_argument("multinomial: size mismatch");
        for (auto& x : out) x = 0;
        double tail = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t v = 0; v < probs.size(); ++v) {
            const double pv = probs[v] > 0.0 ? probs[v] : 0.0;
            tail += pv;
            if (pv > 0.0) last_positive = v;
        }
        std::uint64_t remaining = n;
        for (std::size_t v = 0; v + 1 < probs.size() && remaining > 0; ++v) {
            const double pv = probs[v] > 0.0 ? probs[v] : 0.0;
            if (v == last_positive) break;  // everything left belongs here
            if (!(tail > 0.0)) break;
            double q = pv / tail;
            if (q > 1.0) q = 1.0;
            const std::uint64_t x = binomial(remaining, q);
            out[v] += static_cast<std::uint32_t>(x);
            remaining -= x;
            tail -= pv;
        }
        out[last_positive] += static_cast<std::uint32_t>(remaining);
    }

private:
    static std::uint64_t scramble(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
        return scramble(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
    }

    std::uint64_t state_;
};

}  // namespace cosac
