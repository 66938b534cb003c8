#pragma once

#include <cstdint>

#include "ddisac/types.hpp"

namespace ddisac {

/**
 * splitmix64 stream.  Every consumer derives a fresh stream from
 * (seed, stream index), so all draws are a pure function of those two values
 * and simulation blocks reproduce bit-identically in any execution order.
 * Statistical quality is ample for the Monte Carlo block sizes used here.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  // independent stream for a (seed, index) pair
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // uniform over [0, 2^nbits), nbits in [1, 32]
  std::uint32_t next_bits(int nbits);

  // uniform in [0, 1)
  double next_double();

  // standard normal (Box-Muller, spare cached)
  double next_gaussian();

  // circularly symmetric complex normal with the given total variance;
  // always consumes exactly two 64-bit draws
  cxd next_cgaussian(double total_variance);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ddisac
