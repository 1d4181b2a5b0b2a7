// SPDX-License-Identifier: Apache-2.0
#include "wavid/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace wavid {
namespace {

// Twiddles w_N^k = e^{-j2pi k/N}, k < N/2, cached per thread for the last
// transform size. Repeated transforms of one size never allocate.
const std::vector<cplx>& twiddles(std::size_t n) {
  thread_local std::vector<cplx> table;
  thread_local std::size_t table_n = 0;
  if (table_n != n) {
    table.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      table[k] = cplx(std::cos(a), std::sin(a));
    }
    table_n = n;
  }
  return table;
}

}  // namespace

void fft_inplace(std::span<cplx> x, bool inverse) {
  const std::size_t n = x.size();
  if (!is_pow2(n)) throw InputError("fft: length " + std::to_string(n) + " is not a power of two");
  if (n == 1) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  const auto& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t base = 0; base < n; base += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const double wr = w[k * stride].real();
        const double wi = inverse ? -w[k * stride].imag() : w[k * stride].imag();
        const cplx u = x[base + k];
        const cplx b = x[base + k + half];
        // Plain product; std::complex's operator* adds inf/NaN recovery we never need.
        const cplx v(b.real() * wr - b.imag() * wi, b.real() * wi + b.imag() * wr);
        x[base + k] = u + v;
        x[base + k + half] = u - v;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : x) v *= scale;
  }
}

std::vector<cplx> fft_radix2(std::span<const cplx> x) {
  std::vector<cplx> out(x.begin(), x.end());
  fft_inplace(out, false);
  return out;
}

std::vector<cplx> ifft_radix2(std::span<const cplx> x) {
  std::vector<cplx> out(x.begin(), x.end());
  fft_inplace(out, true);
  return out;
}

}  // namespace wavid
