#pragma once

#include <cstdint>
#include <random>

namespace vaxalloc {

// All randomness goes through std::mt19937_64 (bit-exact across standard
// libraries) and the two helpers below, so a seed fully determines output on
// every platform. std::*_distribution is avoided except for the Gaussian noise
// in the regret module.

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used as the stable hash for seed splitting.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of child stream `index` under `root`: splitmix64(splitmix64(root) ^ index).
/// Child streams are independent of how many siblings are consumed.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(root) ^ index);
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection sampling; bound must be > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return r % bound;
}

}  // namespace vaxalloc
