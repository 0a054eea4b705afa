#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace sensorctl {

/// SplitMix64 finalizer. Bijective on 64-bit words.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of the i-th independent stream derived from a parent seed:
///   child_seed(seed, i) = mix64(mix64(seed) + (i + 1) * 0x9E3779B97F4A7C15)
/// Rollout i of a Monte Carlo batch always uses child_seed(seed, i), so batch
/// results do not depend on how the batch is split across threads.
[[nodiscard]] constexpr std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(mix64(seed) + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Counter-based generator: draw j returns mix64(key + (j + 1) * golden_gamma).
/// All sampling transforms below are fixed so streams are reproducible across
/// platforms and standard library implementations.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1).
    double uniform_open() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (cosine branch only; two uniforms per draw).
    double standard_normal() noexcept;

    /// Inverse-CDF draw from a probability vector. Trailing round-off mass is
    /// assigned to the last index with positive probability.
    std::size_t categorical(std::span<const double> probabilities) noexcept;

    [[nodiscard]] std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace sensorctl
