#pragma once

#include "ddisac/types.hpp"

namespace ddisac {

// Unitary DFT matrix: F(a,b) = exp(-j 2 pi a b / n) / sqrt(n).
CMat dft_matrix(int n);

CMat kron(const CMat& a, const CMat& b);

// (A + A^H)/2; cheap guard before eigendecompositions of products that are
// Hermitian in exact arithmetic.
CMat hermitize(const CMat& a);

// Principal square root of a Hermitian PSD matrix via eigendecomposition.
// Roundoff negatives are clipped to zero; genuinely negative spectra throw.
CMat hermitian_sqrt(const CMat& a);

// z/|z|, or 1 when z is exactly zero.
cxd unit_phase(cxd z);

}  // namespace ddisac
