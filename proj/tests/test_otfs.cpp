#include <doctest.h>

#include <cmath>
#include <complex>

#include "ddisac/linalg.hpp"
#include "ddisac/otfs.hpp"
#include "ddisac/rng.hpp"

using namespace ddisac;

namespace {

PathSet random_paths(Rng& rng, int count, int frame, double k_max) {
  PathSet paths(count);
  for (auto& p : paths) {
    p.gain = rng.next_cgaussian(1.0 / count);
    p.delay_tap = static_cast<int>(rng.next_double() * frame);
    p.doppler_tap = (2.0 * rng.next_double() - 1.0) * k_max;
  }
  return paths;
}

CVec random_vector(Rng& rng, int n) {
  CVec x(n);
  for (int i = 0; i < n; ++i) x(i) = rng.next_cgaussian(1.0);
  return x;
}

}  // namespace

TEST_SUITE("otfs") {
  TEST_CASE("forward cyclic shift small cases") {
    const Eigen::MatrixXd p1 = forward_cyclic_shift(1);
    CHECK(p1(0, 0) == 1.0);

    const Eigen::MatrixXd p2 = forward_cyclic_shift(2);
    CHECK(p2(0, 0) == 0.0);
    CHECK(p2(0, 1) == 1.0);
    CHECK(p2(1, 0) == 1.0);
    CHECK(p2(1, 1) == 0.0);

    CHECK_THROWS_AS((void)forward_cyclic_shift(0), std::invalid_argument);
  }

  TEST_CASE("cyclic shift has order equal to its size") {
    const Eigen::MatrixXd pi = forward_cyclic_shift(6);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(6, 6);
    for (int i = 0; i < 6; ++i) power = pi * power;
    CHECK((power - Eigen::MatrixXd::Identity(6, 6)).norm() == 0.0);
  }

  TEST_CASE("doppler phase matrix values") {
    CHECK((doppler_phase_matrix(0.0, 4) - CMat::Identity(4, 4)).norm() == 0.0);
    CHECK((doppler_phase_matrix(4.0, 4) - CMat::Identity(4, 4)).norm() < 1e-14);

    const CMat d = doppler_phase_matrix(0.5, 2);
    CHECK(std::abs(d(0, 0) - cxd(1, 0)) < 1e-15);
    CHECK(std::abs(d(1, 1) - cxd(0, 1)) < 1e-15);
    CHECK(std::abs(d(0, 1)) == 0.0);
  }

  TEST_CASE("doppler phase matrix is unitary for any real tap") {
    Rng rng = Rng::for_stream(9, 0);
    for (int trial = 0; trial < 20; ++trial) {
      const double k = (2.0 * rng.next_double() - 1.0) * 10.0;
      const CMat d = doppler_phase_matrix(k, 8);
      for (int i = 0; i < 8; ++i) CHECK(std::abs(std::abs(d(i, i)) - 1.0) < 1e-14);
    }
  }

  TEST_CASE("time domain channel trivial paths") {
    const OtfsGrid g21(2, 1, 1000.0);
    CHECK((time_domain_channel({PathParams{1.0, 0, 0.0}}, g21) - CMat::Identity(2, 2)).norm() ==
          0.0);

    const CMat shift = time_domain_channel({PathParams{1.0, 1, 0.0}}, g21);
    CHECK(std::abs(shift(0, 1) - cxd(1, 0)) < 1e-15);
    CHECK(std::abs(shift(1, 0) - cxd(1, 0)) < 1e-15);
    CHECK(std::abs(shift(0, 0)) == 0.0);

    CHECK_THROWS_AS((void)time_domain_channel({PathParams{1.0, 2, 0.0}}, g21),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)time_domain_channel(PathSet{}, g21), std::invalid_argument);
  }

  TEST_CASE("time domain channel matches the direct two-path formula") {
    const OtfsGrid grid(2, 2, 1000.0);
    const int frame = 4;
    const PathSet paths{PathParams{cxd(0.7, -0.2), 1, 0.6}, PathParams{cxd(-0.3, 0.5), 3, -1.2}};
    const CMat h = time_domain_channel(paths, grid);

    // direct evaluation: column j scatters to row (j + l) mod MN with the
    // Doppler phase taken at the output index and the coupled gain phase
    CMat expect = CMat::Zero(frame, frame);
    for (const auto& p : paths) {
      const cxd coupled =
          p.gain * std::exp(cxd(0.0, -2.0 * kPi * p.doppler_tap * p.delay_tap / frame));
      for (int j = 0; j < frame; ++j) {
        const int i = (j + p.delay_tap) % frame;
        expect(i, j) += coupled * std::exp(cxd(0.0, 2.0 * kPi * p.doppler_tap * i / frame));
      }
    }
    CHECK((h - expect).norm() < 1e-14 * expect.norm());
  }

  TEST_CASE("dd channel of the trivial path is the identity") {
    const OtfsGrid grid(2, 2, 1000.0);
    const DdChannel h = dd_channel({PathParams{1.0, 0, 0.0}}, grid);
    CHECK((h.matrix - CMat::Identity(4, 4)).norm() < 1e-14);
  }

  TEST_CASE("dd channel preserves the Frobenius norm of the time channel") {
    Rng rng = Rng::for_stream(10, 0);
    const OtfsGrid grid(4, 4, 1000.0);
    const PathSet paths = random_paths(rng, 3, grid.frame_size(), 2.0);
    const CMat ht = time_domain_channel(paths, grid);
    const DdChannel hdd = dd_channel(paths, grid);
    CHECK(std::abs(ht.norm() - hdd.matrix.norm()) < 1e-12 * ht.norm());
  }

  TEST_CASE("dd channel matches a hand-built dense product") {
    const OtfsGrid grid(2, 2, 1000.0);
    const DdChannel h = dd_channel({PathParams{1.0, 1, 1.0}}, grid);

    CMat f2(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    f2 << cxd(s, 0), cxd(s, 0), cxd(s, 0), cxd(-s, 0);
    const CMat fwd = kron(f2, CMat::Identity(2, 2));

    CMat delta = CMat::Zero(4, 4);
    for (int i = 0; i < 4; ++i) delta(i, i) = std::exp(cxd(0.0, 2.0 * kPi * i / 4.0));
    CMat pi = CMat::Zero(4, 4);
    for (int j = 0; j < 4; ++j) pi((j + 1) % 4, j) = 1.0;
    const cxd coupled = std::exp(cxd(0.0, -2.0 * kPi * 1.0 * 1.0 / 4.0));

    const CMat expect = fwd * (coupled * delta * pi) * fwd.adjoint();
    CHECK((h.matrix - expect).norm() < 1e-13);
  }

  TEST_CASE("dd channel with integer Doppler taps is sparse") {
    Rng rng = Rng::for_stream(12, 0);
    const OtfsGrid grid(4, 4, 1000.0);
    PathSet paths = random_paths(rng, 3, grid.frame_size(), 2.0);
    for (auto& p : paths) p.doppler_tap = std::round(p.doppler_tap);
    const CMat h = dd_channel(paths, grid).matrix;
    const double threshold = 1e-12 * h.cwiseAbs().maxCoeff();
    for (int i = 0; i < h.rows(); ++i) {
      int nonzero = 0;
      for (int j = 0; j < h.cols(); ++j) nonzero += std::abs(h(i, j)) > threshold;
      CHECK(nonzero <= 3);
    }
  }

  TEST_CASE("derivative channel is linear in the gain") {
    const OtfsGrid grid(2, 2, 1000.0);
    const CMat zero = doppler_derivative_channel(PathParams{0.0, 1, 0.5}, grid);
    CHECK(zero.norm() == 0.0);
  }

  TEST_CASE("derivative channel scales linearly with the symbol duration") {
    const PathParams path{cxd(0.8, 0.1), 1, 0.7};
    const OtfsGrid grid(2, 2, 1000.0);
    const OtfsGrid doubled(2, 2, 1000.0, 2.0 / 1000.0);
    const CMat d1 = doppler_derivative_channel(path, grid);
    const CMat d2 = doppler_derivative_channel(path, doubled);
    CHECK((d2 - 2.0 * d1).norm() < 1e-12 * d1.norm());
  }

  TEST_CASE("derivative channel matches central finite differences") {
    const OtfsGrid grid(2, 2, 1000.0);
    const double nt = grid.N * grid.T;
    const double eps = 1e-6;
    const PathParams path{1.0, 1, 0.0};

    PathParams up = path, down = path;
    up.doppler_tap = path.doppler_tap + nt * eps;
    down.doppler_tap = path.doppler_tap - nt * eps;
    const CMat fd =
        (dd_channel({up}, grid).matrix - dd_channel({down}, grid).matrix) / (2.0 * eps);
    const CMat analytic = doppler_derivative_channel(path, grid);
    CHECK((fd - analytic).norm() < 1e-5 * analytic.norm());
  }

  TEST_CASE("modulate with a single time slot is the identity") {
    const OtfsGrid grid(3, 1, 1000.0);
    CVec e1 = CVec::Zero(3);
    e1(0) = 1.0;
    CHECK((otfs_modulate(e1, grid) - e1).norm() < 1e-15);
  }

  TEST_CASE("modulate is unitary and matches the dense operator") {
    Rng rng = Rng::for_stream(13, 0);
    const OtfsGrid grid(2, 2, 1000.0);
    const CVec x = random_vector(rng, 4);
    const CVec s = otfs_modulate(x, grid);
    CHECK(std::abs(s.norm() - x.norm()) < 1e-12 * x.norm());

    const CMat back = kron(dft_matrix(2), CMat::Identity(2, 2));
    CHECK((s - back.adjoint() * x).norm() < 1e-13);

    CHECK_THROWS_AS((void)otfs_modulate(CVec::Zero(3), grid), std::invalid_argument);
  }

  TEST_CASE("demodulate inverts modulate") {
    Rng rng = Rng::for_stream(14, 0);
    const OtfsGrid grid(4, 3, 1000.0);
    const CVec x = random_vector(rng, 12);
    CHECK((otfs_demodulate(otfs_modulate(x, grid), grid) - x).norm() < 1e-12);
    CHECK(otfs_demodulate(CVec::Zero(12), grid).norm() == 0.0);
  }

  TEST_CASE("matrix channel equals the modulate-propagate-demodulate chain") {
    Rng rng = Rng::for_stream(15, 0);
    const OtfsGrid grid(4, 4, 1000.0);
    for (int trial = 0; trial < 5; ++trial) {
      const PathSet paths = random_paths(rng, 3, grid.frame_size(), 2.0);
      const CMat ht = time_domain_channel(paths, grid);
      const CMat hdd = dd_channel(paths, grid).matrix;
      const CVec x = random_vector(rng, grid.frame_size());
      const CVec chain = otfs_demodulate(ht * otfs_modulate(x, grid), grid);
      CHECK((chain - hdd * x).norm() < 1e-10 * std::max(1.0, (hdd * x).norm()));
    }
  }

  TEST_CASE("grid validation") {
    CHECK_THROWS_AS(OtfsGrid(0, 2, 1000.0), std::invalid_argument);
    CHECK_THROWS_AS(OtfsGrid(2, 2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(OtfsGrid(2, 2, 1000.0, -1.0), std::invalid_argument);
  }
}
