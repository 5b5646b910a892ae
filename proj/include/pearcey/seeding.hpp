#pragma once

#include <cstdint>
#include <random>

namespace pearcey {

/// SplitMix64 finaliser (Stafford variant 13). A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Per-trial seed:
///   mix64(mix64(master_seed) + 0x9E3779B97F4A7C15 * (trial_index + 1))   (mod 2^64)
/// For a fixed master seed the map from trial index is injective, and for a fixed
/// index the map from master seed is injective.
constexpr std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  return mix64(mix64(master_seed) + 0x9E3779B97F4A7C15ULL * (trial_index + 1));
}

/// Standard normal draws from mt19937_64 via Box-Muller. The engine's output sequence is
/// fixed by the standard; the transform is written out so draws are reproducible across
/// standard library implementations.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double operator()();

 private:
  /// Uniform in the open interval (0, 1) with 53 random bits.
  double uniform_open();

  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace pearcey
