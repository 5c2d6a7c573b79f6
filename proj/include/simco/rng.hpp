#pragma once

#include <cstdint>

#include "simco/matrix.hpp"

namespace simco {

/// Counter-based generator: the k-th output is a fixed avalanche function of
/// (seed, k), so streams are identical across runs and platforms and a state
/// is fully described by the pair (seed, counter).
///
/// Output k is the SplitMix64 finalizer applied to seed + k * 0x9E3779B97F4A7C15.
class RngState {
public:
  explicit RngState(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double next_gaussian();

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Uniform sample from the unit sphere in R^m (normalized standard Gaussian).
Vector stiefel_sample_uniform(Index m, RngState& rng);

}  // namespace simco
