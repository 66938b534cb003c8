#include "ddisac/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ddisac/linalg.hpp"

namespace ddisac {

namespace {

// ===== shared per-solve context ==========================================

struct DualContext {
  const EigenBasis* comm;
  const EigenBasis* sensing;
  CMat a_gram;    // H^H H
  CMat s0;        // A^{1/2}
  CMat s0_inv;    // A^{-1/2}
  double xi1;
};

DualContext make_context(const EigenBasis& comm, const EigenBasis& sensing) {
  if (comm.values.minCoeff() <= 0.0)
    throw std::domain_error("communication channel Gram must be nonsingular");
  DualContext ctx;
  ctx.comm = &comm;
  ctx.sensing = &sensing;
  const CMat& wc = comm.vectors;
  ctx.a_gram = wc * comm.values.asDiagonal() * wc.adjoint();
  ctx.s0 = wc * comm.values.cwiseSqrt().asDiagonal() * wc.adjoint();
  ctx.s0_inv = wc * comm.values.cwiseSqrt().cwiseInverse().asDiagonal() * wc.adjoint();
  ctx.xi1 = sensing.values(0);
  return ctx;
}

bool in_dual_domain(const DualContext& ctx, double lambda, double mu) {
  // small relative margin keeps (mu - lambda Xi_1)^{-1} representable
  return lambda >= 0.0 && mu - lambda * ctx.xi1 > 1e-14 * std::abs(mu);
}

CMat covariance_at(const DualContext& ctx, double lambda, double mu) {
  if (!in_dual_domain(ctx, lambda, mu))
    throw std::domain_error("multipliers outside the dual domain (need lambda >= 0, mu > lambda * Xi_1)");
  const CMat& ws = ctx.sensing->vectors;
  RVec d = (mu - lambda * ctx.sensing->values.array()).inverse().matrix();
  const CMat s1 = ws * d.asDiagonal() * ws.adjoint();
  const CMat mid = hermitian_sqrt(ctx.s0 * s1 * ctx.s0);
  return hermitize(ctx.s0_inv * mid * ctx.s0_inv);
}

double sensing_trace(const EigenBasis& sensing, const CMat& p) {
  const CMat m = sensing.vectors.adjoint() * p * sensing.vectors;
  return (sensing.values.array() * m.diagonal().real().array()).sum();
}

// ZF MSE trace tr[(P A)^{-1}] = tr(A^{-1} P^{-1})
double mse_trace(const DualContext& ctx, const CMat& p) {
  Eigen::LLT<CMat> llt(p);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("transmit covariance must be positive definite");
  const CMat p_inv = llt.solve(CMat::Identity(p.rows(), p.cols()));
  return (ctx.s0_inv * p_inv * ctx.s0_inv).trace().real();
}

double dual_value(const DualContext& ctx, const CMat& p, double lambda, double mu,
                  double gamma1, double p_t) {
  return mse_trace(ctx, p) + mu * (p.trace().real() - p_t) -
         lambda * (sensing_trace(*ctx.sensing, p) - gamma1);
}

// mu > lambda * Xi_1 with tr(P(lambda, mu)) = p_t, by bisection on the
// monotone decreasing power response; hint (if positive) warm-starts the
// bracket.  Returns mu and stores the final covariance in p_out.
double mu_for_power(const DualContext& ctx, double lambda, double p_t, double hint, CMat& p_out) {
  const double base = lambda * ctx.xi1;
  auto power_at = [&](double s) {
    p_out = covariance_at(ctx, lambda, base + s);
    return p_out.trace().real();
  };
  double s = hint > base ? hint - base : std::max(1e-12, base * 1e-6 + 1e-12);
  if (!(hint > base)) {
    // closed-form guess, exact when lambda == 0
    const double t = ctx.comm->values.cwiseSqrt().cwiseInverse().sum();
    s = (t / p_t) * (t / p_t);
  }
  double lo = s, hi = s;
  double p_lo = power_at(lo);
  for (int i = 0; p_lo < p_t && i < 600; ++i) p_lo = power_at(lo /= 4.0);
  if (p_lo < p_t) throw std::runtime_error("power bracketing failed (low side)");
  double p_hi = power_at(hi);
  for (int i = 0; p_hi > p_t && i < 600; ++i) p_hi = power_at(hi *= 4.0);
  if (p_hi > p_t) throw std::runtime_error("power bracketing failed (high side)");
  if (std::abs(p_lo - p_t) <= 1e-11 * p_t) {
    power_at(lo);  // leave p_out at the returned multiplier
    return base + lo;
  }
  if (std::abs(p_hi - p_t) <= 1e-11 * p_t) {
    power_at(hi);
    return base + hi;
  }

  // Illinois secant on the smooth monotone power response
  double f_lo = p_lo - p_t, f_hi = p_hi - p_t;
  int side = 0;
  for (int i = 0; i < 200; ++i) {
    double mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    const double fm = power_at(mid) - p_t;
    if (std::abs(fm) <= 1e-11 * p_t) return base + mid;
    if (fm > 0) {
      lo = mid;
      f_lo = fm;
      if (side == 1) f_hi *= 0.5;
      side = 1;
    } else {
      hi = mid;
      f_hi = fm;
      if (side == -1) f_lo *= 0.5;
      side = -1;
    }
  }
  const double mid = 0.5 * (lo + hi);
  power_at(mid);
  return base + mid;
}

struct PolishResult {
  double lambda;
  double mu;
  CMat p;
};

// smallest lambda >= 0 whose power-exact covariance meets the sensing floor;
// the returned covariance is the one evaluated at the accepted multipliers
PolishResult polish_duals(const DualContext& ctx, const Eigen::Vector2d& kappa, double gamma1,
                          double p_t) {
  CMat p;
  double mu_hint = 0.0;
  auto eval = [&](double lambda) {
    const double mu = mu_for_power(ctx, lambda, p_t, mu_hint, p);
    mu_hint = mu;
    return std::pair<double, double>(sensing_trace(*ctx.sensing, p), mu);
  };

  auto [t0, mu0] = eval(0.0);
  const double tol = 1e-9 * std::max(1.0, gamma1);
  if (t0 >= gamma1 - tol) return {0.0, mu0, p};

  // bracket the floor crossing in lambda
  double lo = 0.0;
  double f_lo = t0 - gamma1;
  double hi = kappa(0) > 0 ? kappa(0) : mu0 / (2.0 * ctx.xi1);
  auto [t_hi, mu_hi] = eval(hi);
  int guard = 0;
  while (t_hi < gamma1 && ++guard < 400) {
    lo = hi;
    f_lo = t_hi - gamma1;
    hi *= 2.0;
    std::tie(t_hi, mu_hi) = eval(hi);
  }
  if (t_hi < gamma1) throw std::runtime_error("sensing floor bracketing failed");
  PolishResult best{hi, mu_hi, p};
  double f_hi = t_hi - gamma1;
  double t_best = t_hi;

  // Illinois secant from the accepting side of the monotone sensing response
  int side = 0;
  for (int i = 0;
       i < 200 && t_best > gamma1 + tol && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    double mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    const auto [t_mid, mu_mid] = eval(mid);
    if (t_mid >= gamma1) {
      hi = mid;
      f_hi = t_mid - gamma1;
      best = {mid, mu_mid, p};
      t_best = t_mid;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    } else {
      lo = mid;
      f_lo = t_mid - gamma1;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    }
  }
  return best;
}

}  // namespace

// ===== public operations ==================================================

EigenBasis eigen_basis(const CMat& gram) {
  if (gram.rows() != gram.cols()) throw std::invalid_argument("eigen_basis: matrix must be square");
  const double scale = std::max(1.0, gram.norm());
  if ((gram - gram.adjoint()).norm() > 1e-10 * scale)
    throw std::invalid_argument("eigen_basis: matrix must be Hermitian");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(gram));
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen_basis: decomposition failed");

  const Eigen::Index n = gram.rows();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  // descending; stable so equal eigenvalues keep the solver's ordering
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return es.eigenvalues()(a) > es.eigenvalues()(b);
  });

  EigenBasis basis;
  basis.vectors.resize(n, n);
  basis.values.resize(n);
  const double neg_tol = 1e-10 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = es.eigenvalues()(order[i]);
    if (v < -neg_tol) throw std::invalid_argument("eigen_basis: matrix is not PSD");
    basis.values(i) = std::max(0.0, v);
    basis.vectors.col(i) = es.eigenvectors().col(order[i]);
  }
  return basis;
}

EllipsoidState ellipsoid_step(const EllipsoidState& state, const Eigen::Vector2d& d) {
  const double q = d.dot(state.shape_inverse * d);
  if (!(q > 0.0) || !std::isfinite(q))
    throw std::domain_error("ellipsoid_step: cut direction degenerate under the current shape");
  const Eigen::Vector2d dn = d / std::sqrt(q);
  const Eigen::Vector2d bd = state.shape_inverse * dn;
  EllipsoidState next;
  next.center = state.center - bd / 3.0;
  next.shape_inverse = (4.0 / 3.0) * (state.shape_inverse - (2.0 / 3.0) * bd * bd.transpose());
  next.shape_inverse = 0.5 * (next.shape_inverse + next.shape_inverse.transpose()).eval();
  return next;
}

CMat PrecoderSolution::precoder() const {
  if (v.size() == 0)
    throw std::logic_error("precoder: balancing unitary unavailable (equalized Gram singular)");
  return u * sigma.asDiagonal() * v;
}

PrecoderSolution crb_only_precoder(const EigenBasis& sensing, double p_t) {
  if (!(p_t > 0)) throw std::invalid_argument("crb_only_precoder: power must be positive");
  if (!(sensing.values(0) > 0))
    throw std::domain_error("crb_only_precoder: sensing spectrum vanishes");
  PrecoderSolution sol;
  sol.u = sensing.vectors;
  sol.sigma = RVec::Zero(sensing.values.size());
  sol.sigma(0) = std::sqrt(p_t);
  sol.v = CMat::Identity(sensing.values.size(), sensing.values.size());
  sol.covariance = p_t * sensing.vectors.col(0) * sensing.vectors.col(0).adjoint();
  sol.objective = std::numeric_limits<double>::infinity();  // rank one: MN streams cannot be equalized
  sol.feasible = false;
  return sol;
}

PrecoderSolution ber_only_precoder(const EigenBasis& comm, double p_t) {
  if (!(p_t > 0)) throw std::invalid_argument("ber_only_precoder: power must be positive");
  if (comm.values.minCoeff() <= 0.0)
    throw std::domain_error("ber_only_precoder: channel Gram must be nonsingular");
  const Eigen::Index n = comm.values.size();
  const double tr_inv_sqrt = comm.values.cwiseSqrt().cwiseInverse().sum();
  PrecoderSolution sol;
  sol.u = comm.vectors;
  sol.sigma = std::sqrt(p_t / tr_inv_sqrt) * comm.values.array().pow(-0.25).matrix();
  sol.v = dft_matrix(static_cast<int>(n));
  sol.covariance = comm.vectors * sol.sigma.array().square().matrix().asDiagonal() *
                   comm.vectors.adjoint();
  sol.objective = tr_inv_sqrt * tr_inv_sqrt / p_t;
  return sol;
}

std::pair<double, double> gamma_range(const EigenBasis& comm, const EigenBasis& sensing,
                                      const CMat& h_dot, double p_t) {
  if (h_dot.rows() != h_dot.cols() || h_dot.rows() != comm.values.size())
    throw std::invalid_argument("gamma_range: derivative matrix size mismatch");
  const CMat w = ber_only_precoder(comm, p_t).precoder();
  const double gamma_min = (h_dot * w).squaredNorm();
  const double gamma_max = p_t * sensing.values(0);
  return {gamma_min, gamma_max};
}

RVec los_power_allocation(double lambda, double mu, const EigenBasis& sensing, cxd gain) {
  if (lambda < 0) throw std::domain_error("los_power_allocation: lambda must be >= 0");
  if (!(mu > lambda * sensing.values(0)))
    throw std::domain_error("los_power_allocation: need mu > lambda * Xi_1");
  const double g = std::abs(gain);
  if (!(g > 0)) throw std::invalid_argument("los_power_allocation: zero channel gain");
  return ((mu - lambda * sensing.values.array()).sqrt() * g).inverse().matrix();
}

CMat optimal_covariance(double lambda, double mu, const EigenBasis& comm,
                        const EigenBasis& sensing) {
  const DualContext ctx = make_context(comm, sensing);
  return covariance_at(ctx, lambda, mu);
}

Eigen::Vector2d dual_subgradient(const CMat& p, const EigenBasis& sensing, double gamma1,
                                 double p_t) {
  if (p.rows() != p.cols() || p.rows() != sensing.values.size())
    throw std::invalid_argument("dual_subgradient: covariance size mismatch");
  return {gamma1 - sensing_trace(sensing, p), p.trace().real() - p_t};
}

CMat mse_balancing_unitary(const RVec& sigma, const CMat& z_c) {
  if (z_c.rows() != z_c.cols() || sigma.size() != z_c.rows())
    throw std::invalid_argument("mse_balancing_unitary: size mismatch");
  const CMat g = sigma.asDiagonal() * z_c * sigma.asDiagonal();
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(g));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("mse_balancing_unitary: decomposition failed");
  const double tol = 1e-14 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() <= tol)
    throw std::domain_error("mse_balancing_unitary: equalized Gram is singular");
  // eigenvectors of (Sigma Z Sigma)^{-1} are those of Sigma Z Sigma itself
  return es.eigenvectors() * dft_matrix(static_cast<int>(z_c.rows()));
}

bool ber_expansion_feasible(const RVec& sigma, const CMat& z_c, const QamConstellation& c,
                            const NoiseModel& noise) {
  if (z_c.rows() != z_c.cols() || sigma.size() != z_c.rows())
    throw std::invalid_argument("ber_expansion_feasible: size mismatch");
  const CMat g = sigma.asDiagonal() * z_c * sigma.asDiagonal();
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(g));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("ber_expansion_feasible: decomposition failed");
  if (es.eigenvalues().minCoeff() <= 0.0) return false;  // infinite MSE trace
  const double tr = es.eigenvalues().cwiseInverse().sum();
  return tr <= z_c.rows() * c.beta / (3.0 * noise.sigma_c_sq);
}

CVec single_symbol_precoder(const EigenBasis& comm, const EigenBasis& sensing, double gamma1,
                            double p_t) {
  if (!(p_t > 0)) throw std::invalid_argument("single_symbol_precoder: power must be positive");
  if (gamma1 < 0) throw std::invalid_argument("single_symbol_precoder: gamma1 must be >= 0");
  const double xi1 = sensing.values(0);
  if (!(xi1 > 0)) throw std::domain_error("single_symbol_precoder: sensing spectrum vanishes");
  if (gamma1 > p_t * xi1 * (1.0 + 1e-12))
    throw std::domain_error("single_symbol_precoder: sensing floor exceeds P_T * Xi_1");

  const CVec wc1 = comm.vectors.col(0);
  const CVec ws1 = sensing.vectors.col(0);
  const cxd overlap = ws1.dot(wc1);  // ws1^H wc1

  if (p_t * std::norm(overlap) * xi1 > gamma1) return std::sqrt(p_t) * wc1;

  const CVec resid = wc1 - overlap * ws1;
  const double rn = resid.norm();
  if (rn < 1e-12) return std::sqrt(p_t) * unit_phase(overlap) * ws1;  // directions collinear

  const CVec wu = resid / rn;
  const double on_sensing = std::min(gamma1 / xi1, p_t);
  const cxd x = std::sqrt(on_sensing) * unit_phase(overlap);
  const cxd y = std::sqrt(p_t - on_sensing) * unit_phase(wu.dot(wc1));
  return x * ws1 + y * wu;
}

PrecoderSolution solve_precoder(const CMat& h_c, const CMat& h_dot, const SolverConfig& cfg,
                                const QamConstellation& c, const NoiseModel& noise) {
  if (h_c.rows() != h_c.cols() || h_dot.rows() != h_dot.cols() || h_c.rows() != h_dot.rows())
    throw std::invalid_argument("solve_precoder: channel matrices must be square and equal size");
  if (!(cfg.p_t > 0)) throw std::invalid_argument("solve_precoder: power must be positive");
  if (!(cfg.xi0 > 0)) throw std::invalid_argument("solve_precoder: xi0 must be positive");
  const int n = static_cast<int>(h_c.rows());

  const EigenBasis comm = eigen_basis(h_c.adjoint() * h_c);
  const EigenBasis sensing = eigen_basis(h_dot.adjoint() * h_dot);
  if (!(sensing.values(0) > 0))
    throw std::domain_error("solve_precoder: sensing derivative vanishes");
  const DualContext ctx = make_context(comm, sensing);

  const auto [gamma_min, gamma_max] = gamma_range(comm, sensing, h_dot, cfg.p_t);
  const double range_tol = 1e-9 * std::max(1.0, gamma_max);
  if (cfg.gamma1 < gamma_min - range_tol || cfg.gamma1 > gamma_max + range_tol)
    throw std::domain_error("solve_precoder: gamma1 outside the attainable sensing range");
  const double gamma1 = std::clamp(cfg.gamma1, gamma_min, gamma_max);

  // initial ellipsoid: power-exact mu at lambda = 0, lambda at mu0 / (2 Xi_1)
  CMat scratch;
  const double mu0 = mu_for_power(ctx, 0.0, cfg.p_t, 0.0, scratch);
  const double lambda0 = mu0 / (2.0 * ctx.xi1);
  const double rho = cfg.radius_scale * std::max(mu0, lambda0);
  EllipsoidState state{Eigen::Vector2d(lambda0, mu0),
                       Eigen::Matrix2d(rho * rho * Eigen::Matrix2d::Identity())};

  const int cap = cfg.max_iterations > 0
                      ? cfg.max_iterations
                      : 10 * static_cast<int>(std::ceil(std::log(1.0 / cfg.xi0) * n));

  PrecoderSolution sol;
  bool converged = false;
  Eigen::Vector2d kappa_best = state.center;
  double best_dual = -std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= cap; ++iter) {
    const double lambda = state.center(0);
    const double mu = state.center(1);
    Eigen::Vector2d cut;
    if (lambda < 0.0) {
      cut = {-1.0, 0.0};  // outward normal of the violated lambda >= 0
    } else if (!in_dual_domain(ctx, lambda, mu)) {
      cut = {ctx.xi1, -1.0};  // outward normal of the violated mu > lambda Xi_1
    } else {
      const CMat p = covariance_at(ctx, lambda, mu);
      const Eigen::Vector2d d = dual_subgradient(p, sensing, gamma1, cfg.p_t);
      const double metric = std::sqrt(d.dot(state.shape_inverse * d));
      const double dv = dual_value(ctx, p, lambda, mu, gamma1, cfg.p_t);
      sol.history.push_back({iter, lambda, mu, dv, metric});
      if (dv > best_dual) {
        best_dual = dv;
        kappa_best = state.center;
      }
      if (metric < cfg.xi0) {
        converged = true;
        break;
      }
      cut = -d;  // keep the half-space where the dual can improve
    }
    state = ellipsoid_step(state, cut);
  }
  if (!converged)
    throw NonConvergenceError("solve_precoder: iteration cap hit before the stop rule", state);

  const PolishResult polished = polish_duals(ctx, kappa_best, gamma1, cfg.p_t);
  sol.lambda = polished.lambda;
  sol.mu = polished.mu;
  sol.covariance = polished.p;

  const EigenBasis pb = eigen_basis(polished.p);
  sol.u = pb.vectors;
  sol.sigma = pb.values.cwiseMax(0.0).cwiseSqrt();
  const CMat z_c = hermitize(sol.u.adjoint() * ctx.a_gram * sol.u);
  sol.feasible = ber_expansion_feasible(sol.sigma, z_c, c, noise);

  const CMat g = sol.sigma.asDiagonal() * z_c * sol.sigma.asDiagonal();
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(g));
  sol.objective = es.eigenvalues().minCoeff() > 0.0
                      ? es.eigenvalues().cwiseInverse().sum()
                      : std::numeric_limits<double>::infinity();
  if (std::isfinite(sol.objective)) sol.v = mse_balancing_unitary(sol.sigma, z_c);
  return sol;
}

}  // namespace ddisac
