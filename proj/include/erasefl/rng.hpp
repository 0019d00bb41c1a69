// Deterministic random-number streams.
//
// Every stochastic component takes an explicit RngStream, and streams are
// derived from a base seed with derive_stream_seed(), so a run is fully
// reproducible and independent of worker count.  The derivation is pinned
// bit-exactly:
//
//   stream_seed(base, index) = mix64(base + (index + 1) * 0x9E3779B97F4A7C15)
//
// where mix64 is the SplitMix64 finalizer (Steele/Lea/Flood).  Variates are
// pinned too: uniform01 = (next_u64() >> 11) * 2^-53, exponential via inverse
// CDF, normal via Box-Muller (cosine branch, two uniforms per call).

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace erasefl {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Seed for the index-th independent stream of a base seed.  Inserting new
/// stream indices never perturbs existing ones.
inline std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t stream_index) {
    return mix64(base_seed + (stream_index + 1) * kGoldenGamma);
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    static RngStream for_stream(std::uint64_t base_seed, std::uint64_t stream_index) {
        return RngStream(derive_stream_seed(base_seed, stream_index));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Exponential with the given mean (inverse CDF of -mean*ln(1-u)).
    double exponential(double mean = 1.0) {
        return -mean * std::log1p(-uniform01());
    }

    /// Gaussian via Box-Muller, cosine branch.
    double normal(double mean = 0.0, double stddev = 1.0) {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace erasefl
