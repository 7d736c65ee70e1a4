#pragma once

// Project-wide random number generation.
//
// The generator is std::mt19937_64, whose output sequence is fixed by the C++
// standard, so a seed reproduces the same draws on every conforming platform.
// Seeds are expanded through the SplitMix64 finalizer before use, and per-trial
// streams are derived with derive_seed(), which is a pure function of
// (base_seed, trial_index). Changing either function invalidates every golden
// value in the test suite.

#include <cstdint>
#include <random>
#include <string_view>

namespace dlearn {

inline constexpr std::string_view kRngName = "mt19937_64/splitmix64-seeded";

/// SplitMix64 output function (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of trial `index` in a run seeded with `base`:
///   splitmix64(base ^ splitmix64(index)).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return splitmix64(base ^ splitmix64(index));
}

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dlearn
