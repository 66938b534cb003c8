#include <doctest.h>

#include <bit>
#include <cmath>

#include <Eigen/Dense>

#include "ddisac/metrics.hpp"
#include "ddisac/montecarlo.hpp"
#include "ddisac/otfs.hpp"
#include "ddisac/qam.hpp"
#include "ddisac/rng.hpp"
#include "ddisac/solver.hpp"

using namespace ddisac;

namespace {

CMat random_matrix(Rng& rng, int n) {
  CMat a(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = rng.next_cgaussian(1.0);
  return a;
}

DdChannel identity_channel(int m, int n) {
  return DdChannel{CMat::Identity(m * n, m * n), OtfsGrid(m, n, 1000.0)};
}

double three_sigma(const BerEstimate& est) { return 3.0 * est.ci95_halfwidth / 1.96; }

}  // namespace

TEST_SUITE("montecarlo") {
  TEST_CASE("vanishing noise gives zero errors") {
    SimConfig sim;
    sim.blocks = 50;
    sim.seed = 11;
    sim.noise = NoiseModel(1e-20, 1.0);
    const BerEstimate est = simulate_ber(identity_channel(2, 2), CMat::Identity(4, 4), sim);
    CHECK(est.bit_errors == 0);
    CHECK(est.ber == 0.0);
    CHECK(est.bits_total == 50 * 4 * 2);
    CHECK(est.blocks_run == 50);
  }

  TEST_CASE("identity channel matches the closed-form error rate") {
    SimConfig sim;
    sim.blocks = 125000;  // 1e6 bits at 4 QPSK symbols per block
    sim.seed = 12;
    sim.noise = NoiseModel(0.5, 1.0);
    sim.target_error_events.reset();
    const BerEstimate est = simulate_ber(identity_channel(2, 2), CMat::Identity(4, 4), sim);
    CHECK(est.bits_total == 1000000);

    const RVec sinr = sinr_per_symbol(CMat::Identity(4, 4), CMat::Identity(4, 4), sim.noise,
                                      Equalizer::kZf);
    CHECK(sinr(0) == doctest::Approx(2.0).epsilon(1e-12));
    const double analytic = average_ber(sinr, sim.constellation);
    CHECK(std::abs(est.ber - analytic) < three_sigma(est));
  }

  TEST_CASE("one-symbol frames reproduce the scalar error rate") {
    SimConfig sim;
    sim.blocks = 500000;  // 1e6 bits, one symbol per block
    sim.seed = 13;
    sim.noise = NoiseModel(0.5, 1.0);
    sim.target_error_events.reset();
    const BerEstimate est = simulate_ber(identity_channel(1, 1), CMat::Identity(1, 1), sim);
    const auto& c = sim.constellation;
    const double analytic = c.alpha * q_function(std::sqrt(c.beta / sim.noise.sigma_c_sq));
    CHECK(std::abs(est.ber - analytic) < three_sigma(est));
  }

  TEST_CASE("simulation is a pure function of the seed") {
    Rng rng = Rng::for_stream(61, 0);
    const CMat h = random_matrix(rng, 4) + 2.0 * CMat::Identity(4, 4);
    const DdChannel channel{h, OtfsGrid(2, 2, 1000.0)};
    SimConfig sim;
    sim.blocks = 100;
    sim.seed = 99;
    sim.noise = NoiseModel(4.0, 1.0);
    const BerEstimate a = simulate_ber(channel, CMat::Identity(4, 4), sim);
    const BerEstimate b = simulate_ber(channel, CMat::Identity(4, 4), sim);
    CHECK(a.bit_errors == b.bit_errors);
    CHECK(a.bits_total == b.bits_total);
    CHECK(a.ber == b.ber);
    CHECK(a.blocks_run == b.blocks_run);

    sim.seed = 100;
    const BerEstimate other = simulate_ber(channel, CMat::Identity(4, 4), sim);
    CHECK(other.bit_errors != a.bit_errors);
  }

  TEST_CASE("early stop triggers on the error budget") {
    Rng rng = Rng::for_stream(62, 0);
    const CMat h = random_matrix(rng, 4) + 1.5 * CMat::Identity(4, 4);
    const DdChannel channel{h, OtfsGrid(2, 2, 1000.0)};
    SimConfig sim;
    sim.blocks = 100000;
    sim.seed = 5;
    sim.noise = NoiseModel(2.0, 1.0);  // noisy enough to hit the budget quickly
    sim.target_error_events = 50;
    const BerEstimate est = simulate_ber(channel, CMat::Identity(4, 4), sim);
    CHECK(est.bit_errors >= 50);
    CHECK(est.blocks_run < sim.blocks);
    CHECK(est.bits_total == static_cast<std::int64_t>(est.blocks_run) * 8);
  }

  TEST_CASE("zero-forcing equalizer inverts the effective channel") {
    Rng rng = Rng::for_stream(63, 0);
    const CMat h = random_matrix(rng, 4) + 2.0 * CMat::Identity(4, 4);
    const CMat w = random_matrix(rng, 4) + 2.0 * CMat::Identity(4, 4);
    const CMat eq = zf_equalizer(h, w);
    CHECK((eq * (h * w) - CMat::Identity(4, 4)).norm() < 1e-10);

    // MMSE tends to the pseudo-inverse as the noise vanishes
    const CMat eq_small = mmse_equalizer(h, w, NoiseModel(1e-12, 1.0));
    CHECK((eq_small * (h * w) - CMat::Identity(4, 4)).norm() < 1e-6);

    // scalar shrinkage on the identity channel
    const CMat eq_id = mmse_equalizer(CMat::Identity(2, 2), CMat::Identity(2, 2),
                                      NoiseModel(0.25, 1.0));
    CHECK(eq_id(0, 0).real() == doctest::Approx(1.0 / 1.25).epsilon(1e-12));
    CHECK(std::abs(eq_id(0, 1)) < 1e-14);

    CHECK_THROWS_AS((void)zf_equalizer(CMat::Zero(2, 2), CMat::Identity(2, 2)),
                    std::invalid_argument);
  }

  TEST_CASE("linear minimum-MSE equalizer beats perturbed competitors") {
    Rng rng = Rng::for_stream(64, 0);
    const CMat h = random_matrix(rng, 4) + 1.0 * CMat::Identity(4, 4);
    const CMat w = random_matrix(rng, 4) * 0.3 + CMat::Identity(4, 4);
    const double sigma_sq = 0.3;
    const CMat g = h * w;
    // E || Q y - x ||^2 with unit-energy symbols: ||Q G - I||_F^2 + sigma^2 ||Q||_F^2
    const auto mse_of = [&](const CMat& q) {
      return (q * g - CMat::Identity(4, 4)).squaredNorm() + sigma_sq * q.squaredNorm();
    };
    const CMat q_opt = mmse_equalizer(h, w, NoiseModel(sigma_sq, 1.0));
    const double base = mse_of(q_opt);
    for (int trial = 0; trial < 100; ++trial) {
      const CMat q = q_opt + 1e-3 * random_matrix(rng, 4);
      CHECK(mse_of(q) >= base - 1e-12);
    }
  }

  TEST_CASE("delay-Doppler simulation matches the time-domain chain") {
    const OtfsGrid grid(4, 4, 1500.0);
    const PathSet paths = {{cxd(0.8, 0.1), 0, 0.0},
                           {cxd(0.35, -0.4), 1, 0.7},
                           {cxd(-0.2, 0.45), 3, -1.3}};
    const DdChannel channel = dd_channel(paths, grid);
    const CMat w = CMat::Identity(16, 16);
    const double sigma_sq = 0.25;

    SimConfig sim;
    sim.blocks = 3000;
    sim.seed = 21;
    sim.noise = NoiseModel(sigma_sq, 1.0);
    sim.target_error_events.reset();
    const BerEstimate dd = simulate_ber(channel, w, sim);
    CHECK(dd.ber > 0.0);
    CHECK(dd.ber < 0.5);

    // same detection pipeline, but transmitting through the time-domain
    // channel and demodulating; the unitary frame transforms must not change
    // the error statistics
    const CMat h_t = time_domain_channel(paths, grid);
    const CMat eq = zf_equalizer(channel.matrix, w);
    const auto& c = sim.constellation;
    std::int64_t errors = 0, bits = 0;
    std::vector<int> labels(16);
    CVec x(16), noise_vec(16);
    for (int block = 0; block < sim.blocks; ++block) {
      Rng rng = Rng::for_stream(77, static_cast<std::uint64_t>(block));
      for (int i = 0; i < 16; ++i) {
        labels[i] = static_cast<int>(rng.next_bits(2));
        x(i) = c.points[labels[i]];
      }
      for (int i = 0; i < 16; ++i) noise_vec(i) = rng.next_cgaussian(sigma_sq);
      const CVec r = h_t * otfs_modulate(w * x, grid) + noise_vec;
      const CVec x_hat = eq * otfs_demodulate(r, grid);
      for (int i = 0; i < 16; ++i) {
        errors += std::popcount(static_cast<unsigned>(qam_nearest_label(x_hat(i), c) ^
                                                      static_cast<unsigned>(labels[i])));
      }
      bits += 32;
    }
    const double ber_t = static_cast<double>(errors) / static_cast<double>(bits);
    const double sd_t = std::sqrt(ber_t * (1.0 - ber_t) / static_cast<double>(bits));
    const double sd_dd = dd.ci95_halfwidth / 1.96;
    CHECK(std::abs(dd.ber - ber_t) < 3.0 * std::sqrt(sd_t * sd_t + sd_dd * sd_dd));
  }

  TEST_CASE("precoded transmission tracks the analytic error rate") {
    Rng rng = Rng::for_stream(65, 0);
    const CMat h = random_matrix(rng, 4) + 2.0 * CMat::Identity(4, 4);
    const DdChannel channel{h, OtfsGrid(2, 2, 1000.0)};
    const EigenBasis comm = eigen_basis(h.adjoint() * h);
    const CMat w = ber_only_precoder(comm, 4.0).precoder();

    SimConfig sim;
    sim.seed = 31;
    sim.target_error_events.reset();
    for (const Equalizer eq : {Equalizer::kZf, Equalizer::kMmse}) {
      // pick the noise so the analytic rate sits near 1e-2
      double sigma_sq = 1.0;
      for (int probe = 0; probe < 40; ++probe) {
        const NoiseModel noise(sigma_sq, 1.0);
        const double ber = average_ber(sinr_per_symbol(w, h, noise, eq), sim.constellation);
        if (ber > 5e-3 && ber < 5e-2) break;
        sigma_sq *= ber <= 5e-3 ? 1.3 : 0.77;
      }
      sim.noise = NoiseModel(sigma_sq, 1.0);
      sim.equalizer = eq;
      sim.blocks = 50000;  // 4e5 bits
      const double analytic =
          average_ber(sinr_per_symbol(w, h, sim.noise, eq), sim.constellation);
      REQUIRE(analytic > 1e-3);
      REQUIRE(analytic < 1e-1);
      const BerEstimate est = simulate_ber(channel, w, sim);
      if (eq == Equalizer::kZf) {
        // zero-forcing leaves pure Gaussian noise, so the rate is exact
        CHECK(std::abs(est.ber - analytic) < three_sigma(est));
      } else {
        // residual interference is only approximately Gaussian
        CHECK(std::abs(est.ber - analytic) <
              std::max(three_sigma(est), 0.1 * analytic));
      }
    }
  }
}
