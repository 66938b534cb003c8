#pragma once

#include "ddisac/types.hpp"

namespace ddisac {

/**
 * OTFS frame transforms and delay-Doppler channel construction.
 *
 * A frame carries MN symbols x_dd laid out column-major as an M x N grid
 * (delay index fastest).  Modulation is ISFFT to the time-frequency grid
 * followed by a Heisenberg transform with rectangular pulses; demodulation is
 * the matched Wigner transform followed by SFFT.  Algebraically the whole
 * chain collapses to s = (F_N^H kron I_M) x_dd and y = (F_N kron I_M) r with
 * the unitary DFT convention, which is what the channel routines below use.
 *
 * The time-domain channel of a path set is
 *   H_T = sum_p h_p exp(-j 2 pi k_p l_p / MN) Delta^{k_p} Pi^{l_p}
 * with Pi the forward cyclic shift and Delta^k = diag(exp(j 2 pi k i / MN)).
 * Fractional Doppler taps enter Delta exactly.
 */

// Forward cyclic shift: ones on the first subdiagonal and the top-right
// corner, so column j maps onto row (j+1) mod size.
Eigen::MatrixXd forward_cyclic_shift(int size);

// diag(exp(j 2 pi k i / size)), i = 0..size-1; k may be fractional.
CMat doppler_phase_matrix(double doppler_tap, int size);

// MN x MN time-domain channel of the path set over one frame.
CMat time_domain_channel(const PathSet& paths, const OtfsGrid& grid);

// Delay-Doppler domain channel: (F_N kron I_M) H_T (F_N^H kron I_M).
DdChannel dd_channel(const PathSet& paths, const OtfsGrid& grid);

// Derivative of the delay-Doppler channel of a single path with respect to
// its Doppler shift (in Hz for the grid's T), evaluated at k = N T nu:
//   dH/dnu = h' (F_N kron I_M) D Delta^k Pi^l (F_N^H kron I_M),
//   D = diag(j 2 pi T / M * (i - l)), h' = h exp(-j 2 pi k l / MN).
// The phase factor h' comes from the product rule and makes this the exact
// entrywise derivative of dd_channel in nu.
CMat doppler_derivative_channel(const PathParams& path, const OtfsGrid& grid);

// DD-domain symbols -> time-domain samples, s = (F_N^H kron I_M) x_dd.
CVec otfs_modulate(const CVec& x_dd, const OtfsGrid& grid);

// Time-domain samples -> DD-domain symbols, y = (F_N kron I_M) r.
CVec otfs_demodulate(const CVec& r, const OtfsGrid& grid);

}  // namespace ddisac
