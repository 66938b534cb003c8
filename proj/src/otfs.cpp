#include "ddisac/otfs.hpp"

#include "ddisac/linalg.hpp"

namespace ddisac {

namespace {

void check_paths(const PathSet& paths, int frame) {
  if (paths.empty()) throw std::invalid_argument("path set must be nonempty");
  for (const auto& p : paths) {
    if (p.delay_tap < 0 || p.delay_tap >= frame)
      throw std::invalid_argument("delay_tap must lie in [0, MN)");
    if (!std::isfinite(p.doppler_tap))
      throw std::invalid_argument("doppler_tap must be finite");
  }
}

// Delta^k Pi^l scaled by gain, written column by column: column j has its
// single entry at row (j + l) mod MN.
void add_shifted_path(CMat& h, cxd gain, int l, double k) {
  const int n = static_cast<int>(h.rows());
  for (int j = 0; j < n; ++j) {
    const int i = (j + l) % n;
    const double ang = 2.0 * kPi * k * i / n;
    h(i, j) += gain * cxd(std::cos(ang), std::sin(ang));
  }
}

cxd coupled_gain(const PathParams& p, int frame) {
  const double ang = -2.0 * kPi * p.doppler_tap * p.delay_tap / frame;
  return p.gain * cxd(std::cos(ang), std::sin(ang));
}

}  // namespace

Eigen::MatrixXd forward_cyclic_shift(int size) {
  if (size < 1) throw std::invalid_argument("forward_cyclic_shift: size must be >= 1");
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(size, size);
  for (int j = 0; j < size; ++j) pi((j + 1) % size, j) = 1.0;
  return pi;
}

CMat doppler_phase_matrix(double doppler_tap, int size) {
  if (size < 1) throw std::invalid_argument("doppler_phase_matrix: size must be >= 1");
  CMat d = CMat::Zero(size, size);
  for (int i = 0; i < size; ++i) {
    const double ang = 2.0 * kPi * doppler_tap * i / size;
    d(i, i) = cxd(std::cos(ang), std::sin(ang));
  }
  return d;
}

CMat time_domain_channel(const PathSet& paths, const OtfsGrid& grid) {
  const int frame = grid.frame_size();
  check_paths(paths, frame);
  CMat h = CMat::Zero(frame, frame);
  for (const auto& p : paths)
    add_shifted_path(h, coupled_gain(p, frame), p.delay_tap, p.doppler_tap);
  return h;
}

DdChannel dd_channel(const PathSet& paths, const OtfsGrid& grid) {
  const CMat fwd = kron(dft_matrix(grid.N), CMat::Identity(grid.M, grid.M));
  return DdChannel{fwd * time_domain_channel(paths, grid) * fwd.adjoint(), grid};
}

CMat doppler_derivative_channel(const PathParams& path, const OtfsGrid& grid) {
  const int frame = grid.frame_size();
  check_paths({path}, frame);
  CMat inner = CMat::Zero(frame, frame);
  add_shifted_path(inner, coupled_gain(path, frame), path.delay_tap, path.doppler_tap);
  for (int j = 0; j < frame; ++j) {
    const int i = (j + path.delay_tap) % frame;
    inner(i, j) *= cxd(0.0, 2.0 * kPi * grid.T / grid.M * (i - path.delay_tap));
  }
  const CMat fwd = kron(dft_matrix(grid.N), CMat::Identity(grid.M, grid.M));
  return fwd * inner * fwd.adjoint();
}

CVec otfs_modulate(const CVec& x_dd, const OtfsGrid& grid) {
  if (x_dd.size() != grid.frame_size())
    throw std::invalid_argument("otfs_modulate: symbol vector must have MN entries");
  const CMat fm = dft_matrix(grid.M);
  const CMat fn = dft_matrix(grid.N);
  const Eigen::Map<const CMat> x(x_dd.data(), grid.M, grid.N);
  const CMat tf = fm * x * fn.adjoint();   // ISFFT
  const CMat s = fm.adjoint() * tf;        // Heisenberg, rectangular pulse
  return s.reshaped();
}

CVec otfs_demodulate(const CVec& r, const OtfsGrid& grid) {
  if (r.size() != grid.frame_size())
    throw std::invalid_argument("otfs_demodulate: sample vector must have MN entries");
  const CMat fm = dft_matrix(grid.M);
  const CMat fn = dft_matrix(grid.N);
  const Eigen::Map<const CMat> rt(r.data(), grid.M, grid.N);
  const CMat tf = fm * rt;                 // Wigner, rectangular pulse
  const CMat y = fm.adjoint() * tf * fn;   // SFFT
  return y.reshaped();
}

}  // namespace ddisac
