#pragma once

// Portable random draws. The engine is std::mt19937_64 (fully specified by the
// standard); variates are derived here so streams are identical on every
// standard library.

#include <cmath>
#include <cstdint>
#include <random>

namespace hapsdtn::rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t combine(std::uint64_t seed, std::uint64_t value) {
    return splitmix64(seed ^ splitmix64(value + 0x632BE59BD9B4E019ULL));
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) { return lo + (hi - lo) * uniform01(eng); }

inline bool bernoulli(Engine& eng, double p) { return uniform01(eng) < p; }

// Inverse-CDF draw from the exponential density with the given mean (= 1/lambda).
inline double exponential(Engine& eng, double mean) { return -mean * std::log1p(-uniform01(eng)); }

// Standard normal via Box-Muller (one draw per call).
inline double normal(Engine& eng) {
    const double u1 = 1.0 - uniform01(eng);  // (0, 1]
    const double u2 = uniform01(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace hapsdtn::rng
