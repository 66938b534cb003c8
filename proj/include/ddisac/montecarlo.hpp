#pragma once

#include <cstdint>
#include <optional>

#include "ddisac/metrics.hpp"
#include "ddisac/qam.hpp"
#include "ddisac/types.hpp"

namespace ddisac {

/**
 * Seeded bit error rate simulation over the delay-Doppler channel.  Each
 * block draws MN fresh symbols and noise from a stream that is a pure
 * function of (seed, block index), so results are bit-identical regardless
 * of execution order; within a block, symbol labels are drawn first and then
 * the noise samples.
 */
struct SimConfig {
  int blocks = 100;
  std::uint64_t seed = 0;
  Equalizer equalizer = Equalizer::kZf;
  QamConstellation constellation = QamConstellation::make(4);
  NoiseModel noise{1.0, 1.0};
  // stop once this many bit errors accumulate; disabled when empty
  std::optional<std::int64_t> target_error_events = 400;
};

struct BerEstimate {
  std::int64_t bit_errors;
  std::int64_t bits_total;
  double ber;
  double ci95_halfwidth;  // normal approximation; coarse below ~100 error events
  int blocks_run;
};

// Zero-forcing equalizer (H W)^+ = (W^H H^H H W)^{-1} W^H H^H.
CMat zf_equalizer(const CMat& h, const CMat& w);

// Linear MMSE equalizer (sigma_c^2 I + W^H H^H H W)^{-1} W^H H^H for unit
// mean symbol energy.
CMat mmse_equalizer(const CMat& h, const CMat& w, const NoiseModel& noise);

// Simulates uncoded transmission of precoded QAM frames through the channel
// with additive circular noise and hard-decision equalized detection.
BerEstimate simulate_ber(const DdChannel& channel, const CMat& precoder,
                         const SimConfig& sim);

}  // namespace ddisac
