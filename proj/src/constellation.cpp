// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include "wavid/rng.hpp"
#include "wavid/synth.hpp"

namespace wavid {
namespace {

unsigned gray_decode(unsigned g) {
  for (unsigned shift = 1; shift < 32; shift <<= 1) g ^= g >> shift;
  return g;
}

void normalize_energy(std::vector<cplx>& pts) {
  double e = 0.0;
  for (const auto& p : pts) e += std::norm(p);
  const double s = 1.0 / std::sqrt(e / static_cast<double>(pts.size()));
  for (auto& p : pts) p *= s;
}

std::vector<cplx> make_psk(int bits) {
  const unsigned size = 1u << bits;
  std::vector<cplx> pts(size);
  for (unsigned v = 0; v < size; ++v) {
    const double phase = 2.0 * std::numbers::pi * gray_decode(v) / size;
    pts[v] = std::polar(1.0, phase);
  }
  return pts;
}

// QPSK keeps the corner form (1 + j)/sqrt2 for bits 00.
std::vector<cplx> make_qpsk() {
  std::vector<cplx> pts(4);
  for (unsigned v = 0; v < 4; ++v) {
    const double i = (v & 2u) ? -1.0 : 1.0;
    const double q = (v & 1u) ? -1.0 : 1.0;
    pts[v] = cplx(i, q) / std::numbers::sqrt2;
  }
  return pts;
}

// Square QAM: upper half of the bits selects the in-phase level, lower half
// the quadrature level, each Gray-coded.
std::vector<cplx> make_square_qam(int bits) {
  const int half = bits / 2;
  const unsigned levels = 1u << half;
  const unsigned size = 1u << bits;
  std::vector<cplx> pts(size);
  for (unsigned v = 0; v < size; ++v) {
    const unsigned gi = gray_decode(v >> half);
    const unsigned gq = gray_decode(v & (levels - 1));
    const double i = 2.0 * gi - (levels - 1.0);
    const double q = 2.0 * gq - (levels - 1.0);
    pts[v] = cplx(i, q);
  }
  normalize_energy(pts);
  return pts;
}

// 32-point cross: 6x6 grid without the four corners, row-major order.
std::vector<cplx> make_cross32() {
  std::vector<cplx> pts;
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) {
      const bool corner = (r == 0 || r == 5) && (c == 0 || c == 5);
      if (!corner) pts.emplace_back(2.0 * c - 5.0, 5.0 - 2.0 * r);
    }
  }
  normalize_energy(pts);
  return pts;
}

// 4-ring 8+16+20+20 APSK, ring radius ratios 1 : 2.2 : 3.6 : 5.2.
std::vector<cplx> make_apsk64() {
  constexpr std::array<int, 4> counts = {8, 16, 20, 20};
  constexpr std::array<double, 4> radii = {1.0, 2.2, 3.6, 5.2};
  std::vector<cplx> pts;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    for (int k = 0; k < counts[r]; ++k) {
      const double phase = std::numbers::pi * (2.0 * k + 1.0) / counts[r];
      pts.push_back(std::polar(radii[r], phase));
    }
  }
  normalize_energy(pts);
  return pts;
}

}  // namespace

const std::vector<cplx>& constellation(ModulationScheme m) {
  static const std::array<std::vector<cplx>, kModulationCount> tables = {
      make_qpsk(), make_psk(3), make_cross32(), make_apsk64(), make_square_qam(8),
      make_square_qam(12)};
  return tables.at(static_cast<std::size_t>(m));
}

std::vector<cplx> map_symbols(std::span<const std::uint8_t> bits, ModulationScheme m) {
  const auto bps = static_cast<std::size_t>(bits_per_symbol(m));
  if (bits.size() % bps != 0) {
    throw InputError("map_symbols: " + std::to_string(bits.size()) + " bits not divisible by " +
                     std::to_string(bps) + " for " + std::string(to_string(m)));
  }
  const auto& table = constellation(m);
  std::vector<cplx> out;
  out.reserve(bits.size() / bps);
  for (std::size_t i = 0; i < bits.size(); i += bps) {
    unsigned v = 0;
    for (std::size_t b = 0; b < bps; ++b) {
      if (bits[i + b] > 1) throw InputError("map_symbols: bit values must be 0 or 1");
      v = (v << 1) | bits[i + b];
    }
    out.push_back(table[v]);
  }
  return out;
}

std::vector<cplx> random_symbols(std::size_t count, ModulationScheme m, std::uint64_t seed) {
  Rng rng(seed);
  const auto bps = static_cast<std::size_t>(bits_per_symbol(m));
  std::vector<std::uint8_t> bits(count * bps);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  return map_symbols(bits, m);
}

}  // namespace wavid
