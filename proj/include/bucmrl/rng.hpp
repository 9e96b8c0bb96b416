#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bucmrl/types.hpp"

namespace bucmrl {

// splitmix64, used to derive independent stream seeds from a master seed.
// Adding tasks/seeds later never perturbs earlier streams because each
// stream seed is a pure function of (master, tag...).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    // Order-sensitive combine: mixing depends on the argument position, so
    // swapping (master, a) or (a, b) yields an unrelated stream.
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ (splitmix64(a) + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2)));
    s = splitmix64(s ^ (splitmix64(b) + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2)));
    s = splitmix64(s ^ (splitmix64(c) + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2)));
    return s;
}

/// Deterministic random source. One instance per worker; never shared.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    double gamma(double shape) {
        return std::gamma_distribution<double>(shape, 1.0)(engine_);
    }

    /// Index drawn from an (unnormalized, nonnegative) weight vector.
    int categorical(const Vector& weights) {
        double total = weights.sum();
        double u = uniform() * total;
        double acc = 0.0;
        for (int i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return static_cast<int>(weights.size()) - 1;
    }

    /// Dirichlet draw via normalized gammas. Degenerate draws (all-zero from
    /// underflow at tiny concentrations) fall back to the normalized alphas.
    Vector dirichlet(const Vector& alpha) {
        Vector x(alpha.size());
        for (int i = 0; i < alpha.size(); ++i) x[i] = gamma(alpha[i]);
        double s = x.sum();
        if (s <= 0.0 || !std::isfinite(s)) return alpha / alpha.sum();
        return x / s;
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace bucmrl
