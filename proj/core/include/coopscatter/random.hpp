#pragma once

#include <cstdint>
#include <random>

namespace coop {

/// Generator used for every stochastic quantity. Its name is recorded in run
/// manifests so that outputs can be regenerated.
using Rng = std::mt19937_64;
inline constexpr const char* kRngName = "std::mt19937_64; uniform = top 53 bits * 2^-53";

/// Uniform double in [0, 1) with a bit-exact, platform-independent mapping
/// (std::uniform_real_distribution is implementation-defined).
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// splitmix64 finalizer applied to (seed, stream); gives well separated seeds
/// for independent realizations derived from one user seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace coop
