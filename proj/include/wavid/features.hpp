// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "wavid/common.hpp"

namespace wavid {

/// Canonical 80-entry feature vector. Index map (see docs/features.md):
///   0-31  |R(tau)| over kDelaySet          32-39 cumulants
///   40-46 instantaneous amplitude/freq     47-49 chirp slope + 2 zero slots
///   50-57 global time-domain               58-63 spectral
///   64-79 extended
struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  bool operator==(const FeatureVector&) const = default;
};

namespace feat {
inline constexpr std::size_t kAutocorr = 0;
inline constexpr std::size_t kCumulants = 32;
inline constexpr std::size_t kInstStats = 40;
inline constexpr std::size_t kChirp = 47;
inline constexpr std::size_t kGlobalTd = 50;
inline constexpr std::size_t kSpectral = 58;
inline constexpr std::size_t kExtended = 64;

inline constexpr std::size_t kReC20 = 32, kImC20 = 33, kC21 = 34, kReC40 = 35, kImC40 = 36,
                             kReC41 = 37, kImC41 = 38, kC42 = 39;
inline constexpr std::size_t kFreqMean = 40, kFreqStd = 41, kAmpMean = 42, kAmpStd = 43,
                             kAmpDiffSum = 44, kFreqDiffSum = 45, kAmpPeakRatio = 46;
inline constexpr std::size_t kChirpSlope = 47;
inline constexpr std::size_t kGAmpMean = 50, kGAmpStd = 51, kAmpKurtosis = 52, kAcMean = 53,
                             kAcStd = 54, kAcPhaseLin = 55, kAcPhaseQuad = 56, kAcPhaseVar = 57;
inline constexpr std::size_t kSpecCentroid = 58, kSpecVar = 59, kSpecFlat = 60, kLowRatio = 61,
                             kRmsBandwidth = 62, kSpecPeak = 63;
inline constexpr std::size_t kPapr = 64, kAmpSkew = 65, kFreqSkew = 66, kFreqKurtosis = 67,
                             kAmpStdNorm = 68, kFreqStdNorm = 69, kFreqDiffVar = 70,
                             kAcPeakLag = 71, kAcWidth = 72, kSpecSkew = 73, kSpecKurtosis = 74,
                             kBand10 = 75, kPhaseVar = 76, kSqFlat = 77, kAmpDiffNorm = 78,
                             kHighRatio = 79;
}  // namespace feat

/// Short symbolic name of each feature index, e.g. "|R(32)|", "PAPR".
std::string_view feature_name(std::size_t index);

/// The 32 autocorrelation lags at N = 1024 (N_s = M = 32), in canonical order.
/// Duplicated lags are kept so index arithmetic is stable.
inline constexpr std::array<int, 32> kDelaySet = {1,  2,  4,  32, 32, 64, 64,  64,  16, 16, 3,
                                                  7,  15, 31, 31, 31, 33, 33,  256, 128, 64, 32,
                                                  511, 5, 6,  9,  10, 12, 24,  48,  96, 128};

/// Delay set for a general power-of-two N with N_s = 32 and M = N / 32.
std::array<int, 32> delay_set(std::size_t n);

/// R(tau) = (1/N) sum_{n=0}^{N-1-tau} x[n] conj(x[n+tau]). Divisor is N.
/// Throws InputError unless 1 <= tau <= N-1.
cplx autocorr(std::span<const cplx> x, int tau);

/// f[n] = wrap(phi[n+1] - phi[n]) / 2pi in [-0.5, 0.5); zero samples have phase 0.
std::vector<double> inst_freq(std::span<const cplx> x);

struct QuadraticFit {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
};
/// Least-squares y ~ c0 + c1 t + c2 t^2 via the normal equations.
QuadraticFit fit_quadratic(std::span<const double> t, std::span<const double> y);

/// Statistics of a one-sided power spectrum P[0..K-1], K = N/2 + 1.
struct SpectralStats {
  double centroid = 0, variance = 0, flatness = 0, low_ratio = 0, rms_bandwidth = 0, peak = 0;
  double skewness = 0, kurtosis = 0, band10 = 0, high_ratio = 0;
};
SpectralStats spectral_stats(std::span<const double> power);

/// Spectral flatness alone (same epsilon), used for the squared signal.
double spectral_flatness(std::span<const double> power);

inline constexpr double kFlatnessEps = 1e-12;

// Feature groups. Each accepts any power-of-two length >= 256.
std::array<double, 32> feat_autocorr32(std::span<const cplx> x);
std::array<double, 8> feat_cumulants(std::span<const cplx> x);
std::array<double, 7> feat_inst_stats(std::span<const cplx> x);
std::array<double, 3> feat_chirp(std::span<const cplx> x);
std::array<double, 8> feat_global_td(std::span<const cplx> x);
std::array<double, 6> feat_spectral(std::span<const cplx> x);
std::array<double, 16> feat_extended(std::span<const cplx> x);

/// Full 80-dimensional vector of a 1024-sample segment. Uses fixed-size stack
/// scratch; after the first call on a thread it performs no heap allocation.
FeatureVector extract_features(std::span<const cplx> x);
FeatureVector extract_features(const IqSegment& seg);

/// Same computation for another window length (256, 1024 or 4096).
FeatureVector extract_features_sized(std::span<const cplx> x);

/// Batch extraction; the parallel version splits segments across OpenMP
/// threads and is bit-identical to the serial reference.
std::vector<FeatureVector> extract_batch(std::span<const IqSegment> segs);
std::vector<FeatureVector> extract_batch_serial(std::span<const IqSegment> segs);

}  // namespace wavid
