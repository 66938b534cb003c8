#pragma once

#include <limits>
#include <optional>
#include <utility>

#include "ddisac/metrics.hpp"
#include "ddisac/types.hpp"

namespace ddisac {

/**
 * Precoder design trading zero-forcing BER against Doppler estimation
 * accuracy.  The transmit covariance P = U Sigma^2 U^H minimizes the ZF MSE
 * trace tr[(P H^H H)^{-1}] subject to a floor gamma1 on the sensing trace
 * tr(Hdot P Hdot^H) and the power budget tr(P) <= P_T.  The two multipliers
 * are found by a central-cut ellipsoid method on the dual; for fixed
 * multipliers the optimal covariance has a closed form.  A final balancing
 * unitary V equalizes the per-symbol MSEs, which attains the Jensen BER
 * floor whenever the per-symbol convexity gate passes.
 */

// Unitary eigenvectors with descending, clipped-at-zero eigenvalues of a
// Hermitian PSD Gram matrix.
struct EigenBasis {
  CMat vectors;
  RVec values;
};

EigenBasis eigen_basis(const CMat& gram);

struct SolverConfig {
  double p_t = 1.0;          // transmit power budget
  double gamma1 = 0.0;       // sensing trace floor
  double xi0 = 1e-3;         // ellipsoid stop threshold on sqrt(d^T B^-1 d)
  int max_iterations = 0;    // 0 picks 10 * ceil(ln(1/xi0) * MN)
  double radius_scale = 10.; // initial ellipsoid radius = this * max(mu0, lambda0)
};

// Center and inverse shape matrix of the search ellipsoid
// { kappa : (kappa - center)^T B (kappa - center) <= 1 }.
struct EllipsoidState {
  Eigen::Vector2d center;
  Eigen::Matrix2d shape_inverse;
};

// One central-cut update: keeps the half-ellipsoid { d^T (kappa - center) <= 0 }
// and returns the smallest ellipsoid covering it.  Shrinks det(shape_inverse)
// by exactly 16/27 per step.
EllipsoidState ellipsoid_step(const EllipsoidState& state, const Eigen::Vector2d& d);

struct IterationRecord {
  int iteration;
  double lambda;
  double mu;
  double lagrangian;    // dual value at this center
  double stop_metric;   // sqrt(d^T B^-1 d)
};

struct PrecoderSolution {
  CMat u;                        // unitary left factor
  RVec sigma;                    // nonnegative singular values, W = U diag(sigma) V
  CMat v;                        // balancing unitary; empty only for a singular equalized Gram
  CMat covariance;               // P = U diag(sigma^2) U^H
  double lambda = 0.0;           // sensing multiplier
  double mu = 0.0;               // power multiplier
  std::optional<bool> feasible;  // per-symbol BER expansion gate, when evaluated
  double objective = std::numeric_limits<double>::quiet_NaN();  // ZF MSE trace
  std::vector<IterationRecord> history;

  CMat precoder() const;  // U diag(sigma) V; throws when V was not constructed
};

// Iteration cap hit before the stop rule fired.
struct NonConvergenceError : std::runtime_error {
  EllipsoidState last_state;
  NonConvergenceError(const std::string& what, EllipsoidState state)
      : std::runtime_error(what), last_state(std::move(state)) {}
};

// All power on the leading sensing eigenvector; maximizes the sensing trace
// at value P_T * Xi_1.  Not usable for MN-stream equalization (rank one).
PrecoderSolution crb_only_precoder(const EigenBasis& sensing, double p_t);

// Closed-form minimizer of the ZF MSE trace under the power budget alone:
// water-filling-like inverse-quarter-power loading on the channel eigenbasis
// with a DFT balancing unitary, so all per-symbol MSEs are already equal.
PrecoderSolution ber_only_precoder(const EigenBasis& comm, double p_t);

// Attainable range [gamma_min, gamma_max] of the sensing trace floor:
// gamma_max at the CRB-only precoder, gamma_min at the BER-only precoder.
std::pair<double, double> gamma_range(const EigenBasis& comm, const EigenBasis& sensing,
                                      const CMat& h_dot, double p_t);

// Diagonal transmit amplitudes for a line-of-sight channel with scalar gain:
// Gamma_i = 1 / (|gain| * sqrt(mu - lambda * Xi_i)).
RVec los_power_allocation(double lambda, double mu, const EigenBasis& sensing, cxd gain);

// Optimal transmit covariance for fixed multipliers (lambda, mu):
//   P = S0^{-1} (S0 S1 S0)^{1/2} S0^{-1},
// S0 the square root of the channel Gram, S1 = Ws (mu I - lambda Lambda_s)^{-1} Ws^H.
// Requires lambda >= 0 and mu > lambda * Xi_1.
CMat optimal_covariance(double lambda, double mu, const EigenBasis& comm,
                        const EigenBasis& sensing);

// Gradient of the dual function at the covariance that is optimal for the
// current multipliers: (gamma1 - sensing trace, power used - P_T).
Eigen::Vector2d dual_subgradient(const CMat& p, const EigenBasis& sensing, double gamma1,
                                 double p_t);

// Right unitary that equalizes the diagonal of (Sigma Z_c Sigma)^{-1} at
// tr/MN, with z_c = U^H H^H H U: eigenvectors of the inverse followed by a
// DFT.  Throws when the equalized Gram is singular.
CMat mse_balancing_unitary(const RVec& sigma, const CMat& z_c);

// Gate for the per-symbol BER expansion:
// tr[(Sigma Z_c Sigma)^{-1}] <= MN * beta / (3 sigma_c^2).
bool ber_expansion_feasible(const RVec& sigma, const CMat& z_c, const QamConstellation& c,
                            const NoiseModel& noise);

// Best single-stream beamformer under the sensing floor: full power on the
// leading channel eigenvector when that already meets the floor, otherwise
// the phase-aligned two-term combination of the leading sensing eigenvector
// and the orthogonalized channel direction.
CVec single_symbol_precoder(const EigenBasis& comm, const EigenBasis& sensing, double gamma1,
                            double p_t);

// Full design: dual ellipsoid iteration with per-iteration history, followed
// by a bisection polish that exhausts the power budget and meets the sensing
// floor to tight tolerance, then the balancing unitary when the BER
// expansion gate passes.
PrecoderSolution solve_precoder(const CMat& h_c, const CMat& h_dot, const SolverConfig& cfg,
                                const QamConstellation& c, const NoiseModel& noise);

}  // namespace ddisac
