/// @file
/// @brief Portable seeded random source.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the C++ standard
/// (the 10000th draw from the default seed is 9981545732273789042). The
/// standard distributions are implementation-defined, so every derived draw
/// below is computed from raw 64-bit outputs by hand.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace cadenza {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (seed, stream id); used so that phrase k or
  /// measure m always sees the same draws regardless of earlier activity.
  static Rng ForStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t Next() { return engine_(); }

  /// Uniform integer in [0, n); n > 0. Rejection sampling, no modulo bias.
  std::uint64_t Below(std::uint64_t n);
  /// Uniform double in [0, 1) with 53 random bits.
  double Unit();
  bool Chance(double p) { return p > 0 && Unit() < p; }

  /// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);

}  // namespace cadenza
