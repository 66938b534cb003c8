#include "ddisac/linalg.hpp"

namespace ddisac {

CMat dft_matrix(int n) {
  if (n < 1) throw std::invalid_argument("dft_matrix: size must be >= 1");
  CMat f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      // reduce the index product mod n before forming the angle to keep the
      // roots of unity exact for large grids
      const long long r = (static_cast<long long>(a) * b) % n;
      const double ang = -2.0 * kPi * static_cast<double>(r) / n;
      f(a, b) = scale * cxd(std::cos(ang), std::sin(ang));
    }
  }
  return f;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMat hermitize(const CMat& a) { return 0.5 * (a + a.adjoint()); }

CMat hermitian_sqrt(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("hermitian_sqrt: eigendecomposition failed");
  RVec vals = es.eigenvalues();
  const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals(i) < -1e-10 * scale)
      throw std::invalid_argument("hermitian_sqrt: matrix is not PSD");
    vals(i) = std::sqrt(std::max(0.0, vals(i)));
  }
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

cxd unit_phase(cxd z) {
  const double m = std::abs(z);
  if (m == 0.0) return cxd(1.0, 0.0);
  return z / m;
}

}  // namespace ddisac
