#pragma once

#include <cstdint>
#include <random>

namespace entrykin {

using Rng = std::mt19937_64;

/// Seed for stream `index` derived from `base`: one SplitMix64 finalizer round applied to
/// base + (index + 1) * golden-ratio increment. Stable across platforms and releases.
[[nodiscard]] std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) noexcept;

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
[[nodiscard]] inline double uniform01(Rng& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace entrykin
