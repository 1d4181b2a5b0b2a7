// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "wavid/common.hpp"

namespace wavid {

inline constexpr bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 DIT FFT. Unnormalized forward transform
/// X[k] = sum x[n] e^{-j2pi kn/N}; the inverse applies the 1/N factor.
/// Throws InputError when the length is not a power of two.
void fft_inplace(std::span<cplx> x, bool inverse = false);

std::vector<cplx> fft_radix2(std::span<const cplx> x);
std::vector<cplx> ifft_radix2(std::span<const cplx> x);

}  // namespace wavid
