#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace ddisac {

using cxd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/**
 * Delay-Doppler grid of one OTFS frame: M delay bins by N Doppler bins.
 * delta_f is the subcarrier spacing in Hz and T the symbol duration in
 * seconds.  With rectangular pulses the grid is critically sampled when
 * T = 1/delta_f, which is what the two-argument constructor sets up; T only
 * matters for Doppler-derivative scaling, never for the frame transforms.
 */
struct OtfsGrid {
  int M;
  int N;
  double delta_f;
  double T;

  OtfsGrid(int m, int n, double df) : OtfsGrid(m, n, df, 1.0 / df) {}
  OtfsGrid(int m, int n, double df, double t) : M(m), N(n), delta_f(df), T(t) {
    if (m < 1 || n < 1) throw std::invalid_argument("OtfsGrid: M and N must be >= 1");
    if (!std::isfinite(df) || df <= 0.0) throw std::invalid_argument("OtfsGrid: delta_f must be > 0");
    if (!std::isfinite(t) || t <= 0.0) throw std::invalid_argument("OtfsGrid: T must be > 0");
  }

  int frame_size() const { return M * N; }
  double frame_duration() const { return N * T; }
};

// One propagation path resolved on the grid.  delay_tap is an integer number
// of delay bins; doppler_tap may be fractional (off-grid Doppler is exact in
// the channel construction, no approximation).
struct PathParams {
  cxd gain{1.0, 0.0};
  int delay_tap = 0;
  double doppler_tap = 0.0;
};

using PathSet = std::vector<PathParams>;

// Delay-Doppler domain channel matrix of size MN x MN together with the grid
// it was built for.
struct DdChannel {
  CMat matrix;
  OtfsGrid grid;
};

// Complex noise variances per sample: sigma_c_sq on the communication link,
// sigma_s_sq on the sensing echo.  Each is the total variance of one complex
// sample (half per real dimension).
struct NoiseModel {
  double sigma_c_sq;
  double sigma_s_sq;

  NoiseModel(double c, double s) : sigma_c_sq(c), sigma_s_sq(s) {
    if (!std::isfinite(c) || c <= 0.0 || !std::isfinite(s) || s <= 0.0)
      throw std::invalid_argument("NoiseModel: variances must be positive");
  }
};

}  // namespace ddisac
