// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <cmath>
#include <random>

namespace spacor {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent, reproducible streams
/// from a master seed without sharing generator state between trials.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed for sub-stream `index` of stream `master`. Nest calls for
/// multi-level indices (sweep point, scheme, trial).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return mix64(mix64(master) ^ mix64(index + 0x632BE59BD9B4E019ull));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index)
{
    return Rng(derive_seed(master, index));
}

/// Uniform double in [0, 1) from the top 53 bits; portable across standard
/// libraries, unlike std::uniform_real_distribution.
inline double unit_uniform(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi)
{
    return lo + (hi - lo) * unit_uniform(rng);
}

/// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n)
{
    return static_cast<std::uint64_t>(unit_uniform(rng) * static_cast<double>(n));
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance
/// (Marsaglia polar method, both outputs used).
inline std::complex<double> complex_gaussian(Rng& rng, double variance)
{
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * unit_uniform(rng) - 1.0;
        v = 2.0 * unit_uniform(rng) - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s) * std::sqrt(variance / 2.0);
    return {u * f, v * f};
}

} // namespace spacor
