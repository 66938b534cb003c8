#include "ddisac/montecarlo.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ddisac/rng.hpp"

namespace ddisac {

namespace {

// (zeta sigma^2 I + G^H G)^{-1} G^H with G = H W; zeta toggles the MMSE bias.
CMat regularized_pseudoinverse(const CMat& h, const CMat& w, double zeta_sigma_sq) {
  const CMat g = h * w;
  CMat gram = g.adjoint() * g;
  gram.diagonal().array() += zeta_sigma_sq;
  Eigen::LLT<CMat> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("effective channel is singular");
  }
  return llt.solve(g.adjoint());
}

}  // namespace

CMat zf_equalizer(const CMat& h, const CMat& w) {
  return regularized_pseudoinverse(h, w, 0.0);
}

CMat mmse_equalizer(const CMat& h, const CMat& w, const NoiseModel& noise) {
  return regularized_pseudoinverse(h, w, noise.sigma_c_sq);
}

BerEstimate simulate_ber(const DdChannel& channel, const CMat& precoder,
                         const SimConfig& sim) {
  const CMat& h = channel.matrix;
  if (h.rows() != h.cols() || h.rows() != precoder.rows() ||
      precoder.rows() != precoder.cols()) {
    throw std::invalid_argument("channel and precoder must be square and compatible");
  }
  if (sim.blocks <= 0) {
    throw std::invalid_argument("blocks must be positive");
  }
  const int n = static_cast<int>(h.rows());
  const QamConstellation& c = sim.constellation;
  const int bits_per_symbol = static_cast<int>(std::lround(std::log2(c.order)));

  const CMat eq = sim.equalizer == Equalizer::kZf
                      ? zf_equalizer(h, precoder)
                      : mmse_equalizer(h, precoder, sim.noise);
  const CMat g = h * precoder;

  std::int64_t errors = 0;
  std::int64_t bits = 0;
  int blocks_run = 0;
  std::vector<int> labels(n);
  CVec x(n);
  CVec noise_vec(n);

  for (int block = 0; block < sim.blocks; ++block) {
    Rng rng = Rng::for_stream(sim.seed, static_cast<std::uint64_t>(block));
    for (int i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng.next_bits(bits_per_symbol));
      x(i) = c.points[labels[i]];
    }
    for (int i = 0; i < n; ++i) {
      noise_vec(i) = rng.next_cgaussian(sim.noise.sigma_c_sq);
    }
    const CVec y = g * x + noise_vec;
    const CVec x_hat = eq * y;
    for (int i = 0; i < n; ++i) {
      const int detected = qam_nearest_label(x_hat(i), c);
      errors += std::popcount(static_cast<unsigned>(detected ^ labels[i]));
    }
    bits += static_cast<std::int64_t>(n) * bits_per_symbol;
    ++blocks_run;
    if (sim.target_error_events && errors >= *sim.target_error_events) {
      break;
    }
  }

  const double p = static_cast<double>(errors) / static_cast<double>(bits);
  const double ci = 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(bits));
  return BerEstimate{errors, bits, p, ci, blocks_run};
}

}  // namespace ddisac
