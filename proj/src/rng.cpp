#include "simco/rng.hpp"

#include <cmath>

namespace simco {

double RngState::next_gaussian() {
  // Box-Muller; u1 shifted away from 0 so the log is always finite.
  double u1 = next_double();
  double u2 = next_double();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t RngState::next_below(std::uint64_t n) {
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

Vector stiefel_sample_uniform(Index m, RngState& rng) {
  if (m < 1) throw contract_error("stiefel_sample_uniform: m must be >= 1");
  Vector v(m);
  double norm2;
  do {
    for (Index i = 0; i < m; ++i) v(i) = rng.next_gaussian();
    norm2 = v.squaredNorm();
  } while (norm2 == 0.0);
  return v / std::sqrt(norm2);
}

}  // namespace simco
