#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dgs {

/// splitmix64 mixing step; used to derive independent sub-seeds so that
/// per-event randomness (dropout masks, negative samples) does not depend on
/// thread scheduling or processing order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return splitmix64(mix_seed(a, b) ^ splitmix64(c));
}

using Rng = std::mt19937_64;

/// Uniform in [0,1). Hand-rolled 53-bit construction so streams are identical
/// across standard library implementations.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline double log_uniform(Rng& rng, double lo, double hi) {
    return std::exp(uniform_real(rng, std::log(lo), std::log(hi)));
}

/// Uniform integer in [lo, hi] inclusive, by rejection.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    // n must be >= 1; returns value in [0, n).
    const std::uint64_t limit = ~0ull - ~0ull % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

inline long long uniform_int(Rng& rng, long long lo, long long hi) {
    return lo + static_cast<long long>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

/// Standard normal via Box-Muller (no cached spare; two uniforms per draw).
inline double normal01(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace dgs
