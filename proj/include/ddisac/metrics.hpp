#pragma once

#include "ddisac/qam.hpp"
#include "ddisac/types.hpp"

namespace ddisac {

/**
 * Link-quality metrics for a precoded delay-Doppler frame.  Throughout, W is
 * the MN x K precoder (K = MN for a full frame, K = 1 for a single stream),
 * H the delay-Doppler channel, and the receiver is a linear equalizer.
 * Per-symbol SINR follows from the equalized error covariance; bit error
 * rates use the nearest-neighbour QAM expansion alpha * Q(sqrt(beta * SINR)).
 */

double q_function(double x);  // Gaussian tail, 0.5 * erfc(x / sqrt 2)

enum class Equalizer { kZf, kMmse };

// Error covariance of the zero-forcing equalizer:
//   E = sigma_c^2 ((H W)^H (H W))^{-1}.
CMat zf_mse_matrix(const CMat& w, const CMat& h, double sigma_c_sq);

// SINR of each symbol stream under ZF or MMSE equalization,
//   SINR_i = 1 / [sigma^2 (zeta sigma^2 I + W^H H^H H W)^{-1}]_{ii} - zeta
// with zeta = 0 for ZF, 1 for MMSE.
RVec sinr_per_symbol(const CMat& w, const CMat& h, const NoiseModel& noise, Equalizer eq);

// Frame-averaged bit error rate from per-symbol SINRs.
double average_ber(const RVec& sinr, const QamConstellation& c);

// Jensen floor of the ZF average BER: every diagonal MSE replaced by the mean,
//   alpha * Q(sqrt(beta MN / (sigma^2 tr[(W^H H^H H W)^{-1}]))).
double ber_lower_bound(const CMat& w, const CMat& h, const NoiseModel& noise,
                       const QamConstellation& c);

// Best attainable BER bound when only the K strongest channel eigenmodes
// carry symbols; eigs must be the descending eigenvalues of H^H H.
double ber_only_lower_bound_k(const RVec& eigs, int k, double p_t, const NoiseModel& noise,
                              const QamConstellation& c);

// Fisher information of the Doppler shift carried by the precoded frame,
//   I = tr(Hdot W W^H Hdot^H) / sigma_s^2, for unit-energy symbols.
double fisher_information(const CMat& w, const CMat& h_dot, const NoiseModel& noise);

// Cramer-Rao bound 1 / I; throws when the Fisher information vanishes.
double compute_crb(const CMat& w, const CMat& h_dot, const NoiseModel& noise);

// Per-symbol check that the operating point sits in the convex region of the
// Q-function BER expansion: sigma_c^2 <= beta / (3 [(W^H H^H H W)^{-1}]_{ii}).
std::vector<bool> convexity_condition_holds(const CMat& w, const CMat& h,
                                            const NoiseModel& noise,
                                            const QamConstellation& c);

// Per-channel-use rate log2 det(I + H W W^H H^H / sigma_c^2) / MN.
double achievable_capacity(const CMat& w, const CMat& h, double sigma_c_sq);

}  // namespace ddisac
