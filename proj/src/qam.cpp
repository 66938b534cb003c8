#include "ddisac/qam.hpp"

#include <cmath>

namespace ddisac {

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

int gray_encode(int v) { return v ^ (v >> 1); }

// amplitude of level index g out of levels: ..., -3, -1, 1, 3, ...
double pam_amplitude(int g, int levels) { return 2.0 * g - (levels - 1); }

}  // namespace

QamConstellation QamConstellation::make(int order) {
  if (order < 4 || !is_pow2(order))
    throw std::invalid_argument("QamConstellation: order must be a power of two >= 4");
  QamConstellation c;
  c.order = order;
  const int bits = static_cast<int>(std::lround(std::log2(order)));
  const int bits_i = (bits + 1) / 2;
  const int bits_q = bits / 2;
  const int li = 1 << bits_i;
  const int lq = 1 << bits_q;
  // unit mean energy: an L-level PAM axis contributes (L^2 - 1)/3
  const double energy = (li * li - 1) / 3.0 + (lq * lq - 1) / 3.0;
  const double scale = 1.0 / std::sqrt(energy);
  c.points.assign(order, cxd(0, 0));
  for (int gi = 0; gi < li; ++gi) {
    for (int gq = 0; gq < lq; ++gq) {
      const int label = (gray_encode(gi) << bits_q) | gray_encode(gq);
      c.points[label] = scale * cxd(pam_amplitude(gi, li), pam_amplitude(gq, lq));
    }
  }
  c.alpha = (4.0 - 4.0 / std::sqrt(static_cast<double>(order))) / bits;
  c.beta = 3.0 / (order - 1);
  return c;
}

int QamConstellation::bits_per_symbol() const {
  return static_cast<int>(std::lround(std::log2(order)));
}

std::vector<cxd> qam_map(const std::vector<std::uint8_t>& bits, const QamConstellation& c) {
  const int bps = c.bits_per_symbol();
  if (bits.size() % bps != 0)
    throw std::invalid_argument("qam_map: bit count must be a multiple of bits per symbol");
  std::vector<cxd> out;
  out.reserve(bits.size() / bps);
  for (std::size_t i = 0; i < bits.size(); i += bps) {
    int label = 0;
    for (int b = 0; b < bps; ++b) {
      if (bits[i + b] > 1) throw std::invalid_argument("qam_map: bits must be 0 or 1");
      label = (label << 1) | bits[i + b];
    }
    out.push_back(c.points[label]);
  }
  return out;
}

int qam_nearest_label(cxd symbol, const QamConstellation& c) {
  int best = 0;
  double best_d = std::norm(symbol - c.points[0]);
  for (int l = 1; l < c.order; ++l) {
    const double d = std::norm(symbol - c.points[l]);
    if (d < best_d) {
      best_d = d;
      best = l;
    }
  }
  return best;
}

std::vector<std::uint8_t> qam_demap_hard(const std::vector<cxd>& symbols,
                                         const QamConstellation& c) {
  const int bps = c.bits_per_symbol();
  std::vector<std::uint8_t> bits;
  bits.reserve(symbols.size() * bps);
  for (const cxd s : symbols) {
    const int label = qam_nearest_label(s, c);
    for (int b = bps - 1; b >= 0; --b) bits.push_back((label >> b) & 1);
  }
  return bits;
}

}  // namespace ddisac
