#include "ddisac/metrics.hpp"

#include <cmath>

namespace ddisac {

namespace {

void check_shapes(const CMat& w, const CMat& h) {
  if (h.rows() != h.cols() || w.rows() != h.cols() || w.cols() < 1 || w.cols() > w.rows())
    throw std::invalid_argument("channel must be square and the precoder MN x K with K <= MN");
}

// (zeta sigma^2 I + W^H H^H H W)^{-1}, the shared core of the linear
// equalizer error statistics; K x K for an MN x K precoder
CMat equalized_inverse(const CMat& w, const CMat& h, double sigma_sq, double zeta) {
  const CMat g = h * w;
  const CMat gram = g.adjoint() * g;
  CMat shifted = gram;
  shifted.diagonal().array() += zeta * sigma_sq;
  Eigen::LLT<CMat> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("effective channel is singular; cannot equalize");
  return llt.solve(CMat::Identity(gram.rows(), gram.cols()));
}

}  // namespace

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

CMat zf_mse_matrix(const CMat& w, const CMat& h, double sigma_c_sq) {
  check_shapes(w, h);
  if (!(sigma_c_sq > 0)) throw std::invalid_argument("noise variance must be positive");
  return sigma_c_sq * equalized_inverse(w, h, sigma_c_sq, 0.0);
}

RVec sinr_per_symbol(const CMat& w, const CMat& h, const NoiseModel& noise, Equalizer eq) {
  check_shapes(w, h);
  const double zeta = eq == Equalizer::kZf ? 0.0 : 1.0;
  const CMat inv = equalized_inverse(w, h, noise.sigma_c_sq, zeta);
  RVec sinr(inv.rows());
  for (Eigen::Index i = 0; i < inv.rows(); ++i)
    sinr(i) = 1.0 / (noise.sigma_c_sq * inv(i, i).real()) - zeta;
  return sinr;
}

double average_ber(const RVec& sinr, const QamConstellation& c) {
  if (sinr.size() == 0) throw std::invalid_argument("average_ber: empty SINR vector");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < sinr.size(); ++i) {
    if (sinr(i) < 0) throw std::invalid_argument("average_ber: SINR must be nonnegative");
    acc += q_function(std::sqrt(c.beta * sinr(i)));
  }
  return c.alpha * acc / static_cast<double>(sinr.size());
}

double ber_lower_bound(const CMat& w, const CMat& h, const NoiseModel& noise,
                       const QamConstellation& c) {
  check_shapes(w, h);
  const double tr = equalized_inverse(w, h, noise.sigma_c_sq, 0.0).trace().real();
  const double n = static_cast<double>(w.cols());
  return c.alpha * q_function(std::sqrt(c.beta * n / (noise.sigma_c_sq * tr)));
}

double ber_only_lower_bound_k(const RVec& eigs, int k, double p_t, const NoiseModel& noise,
                              const QamConstellation& c) {
  if (k < 1 || k > eigs.size())
    throw std::invalid_argument("ber_only_lower_bound_k: K out of range");
  if (!(p_t > 0)) throw std::invalid_argument("ber_only_lower_bound_k: power must be positive");
  double s = 0.0;
  for (int i = 0; i < k; ++i) {
    if (i + 1 < eigs.size() && eigs(i + 1) > eigs(i) + 1e-12 * std::abs(eigs(i)))
      throw std::invalid_argument("ber_only_lower_bound_k: eigenvalues must be descending");
    if (!(eigs(i) > 0))
      throw std::invalid_argument("ber_only_lower_bound_k: leading eigenvalues must be positive");
    s += 1.0 / std::sqrt(eigs(i));
  }
  const double arg = c.beta * k * p_t / (noise.sigma_c_sq * s * s);
  return c.alpha * q_function(std::sqrt(arg));
}

double fisher_information(const CMat& w, const CMat& h_dot, const NoiseModel& noise) {
  check_shapes(w, h_dot);
  return (h_dot * w).squaredNorm() / noise.sigma_s_sq;
}

double compute_crb(const CMat& w, const CMat& h_dot, const NoiseModel& noise) {
  const double info = fisher_information(w, h_dot, noise);
  if (!(info > 0)) throw std::domain_error("compute_crb: Fisher information is zero");
  return 1.0 / info;
}

std::vector<bool> convexity_condition_holds(const CMat& w, const CMat& h,
                                            const NoiseModel& noise,
                                            const QamConstellation& c) {
  check_shapes(w, h);
  const CMat inv = equalized_inverse(w, h, noise.sigma_c_sq, 0.0);
  std::vector<bool> ok(inv.rows());
  for (Eigen::Index i = 0; i < inv.rows(); ++i)
    ok[i] = noise.sigma_c_sq <= c.beta / (3.0 * inv(i, i).real());
  return ok;
}

double achievable_capacity(const CMat& w, const CMat& h, double sigma_c_sq) {
  check_shapes(w, h);
  if (!(sigma_c_sq > 0)) throw std::invalid_argument("noise variance must be positive");
  const CMat g = h * w;
  CMat a = g * g.adjoint() / sigma_c_sq;
  a.diagonal().array() += 1.0;
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("achievable_capacity: factorization failed");
  const CMat l = llt.matrixL();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) log_det += 2.0 * std::log(l(i, i).real());
  return log_det / std::log(2.0) / static_cast<double>(a.rows());
}

}  // namespace ddisac
