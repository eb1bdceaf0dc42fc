#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace plankit {

/// SplitMix64 finalizer. Used for every seed derivation so that trial and
/// sub-stream seeds can be recomputed in any language:
///   z = x + 0x9E3779B97F4A7C15
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of trial `index` under `base_seed`: mix64(mix64(base_seed) ^ index).
constexpr std::uint64_t split_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
  return mix64(mix64(base_seed) ^ index);
}

/// Named sub-streams of one trial seed. Values are part of the
/// reproducibility contract; do not renumber.
enum class SubStream : std::uint64_t {
  kEpsilonCoin = 1,
  kExploration = 2,
  kEnvironment = 3,
  kRollout = 4,
};

/// A seeded stream of uniform draws. The engine is mt19937_64, whose output
/// sequence is fixed by the C++ standard; the conversions below are spelled
/// out instead of using <random> distributions, which are implementation
/// defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static RandomStream sub(std::uint64_t trial_seed, SubStream which) {
    return RandomStream(split_seed(trial_seed, static_cast<std::uint64_t>(which)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace plankit
