#pragma once

#include <cstdint>

#include "ddisac/types.hpp"

namespace ddisac {

/**
 * Gray-labelled QAM alphabets with unit mean symbol energy.
 *
 * Bits split between the axes (I gets the extra bit for odd widths, so 8-QAM
 * is the rectangular 4x2 grid) and each axis carries a reflected Gray code,
 * so constellation neighbours along an axis differ in exactly one bit.
 * points is indexed by the bit label of the symbol.  alpha and beta are the
 * coefficients of the nearest-neighbour bit error rate expansion
 * P_b ~ alpha * Q(sqrt(beta * SINR)).
 */
struct QamConstellation {
  int order;
  std::vector<cxd> points;
  double alpha;
  double beta;

  static QamConstellation make(int order);
  int bits_per_symbol() const;
};

// Maps packed bits (MSB-first groups of bits_per_symbol) onto symbols.
// bits.size() must be a multiple of bits_per_symbol.
std::vector<cxd> qam_map(const std::vector<std::uint8_t>& bits, const QamConstellation& c);

// Hard nearest-neighbour decision back to bits; inverse of qam_map on clean
// symbols.
std::vector<std::uint8_t> qam_demap_hard(const std::vector<cxd>& symbols,
                                         const QamConstellation& c);

// Bit label of the nearest constellation point.
int qam_nearest_label(cxd symbol, const QamConstellation& c);

}  // namespace ddisac
