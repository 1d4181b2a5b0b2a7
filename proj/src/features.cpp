// SPDX-License-Identifier: Apache-2.0
#include "wavid/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wavid/fft.hpp"

namespace wavid {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kAcLags = 64;    // |R(tau)|, tau = 1..64, for M_ac, S_ac, I_peak, W_ac
constexpr int kPhaseLags = 32; // arg R(tau), tau = 1..32, for c1, c2, var
// A standard deviation at or below this (relative to the mean amplitude for
// amplitude statistics, absolute for frequency statistics) counts as zero.
constexpr double kDegenerate = 1e-10;

using RTable = std::array<cplx, kAcLags + 1>;

double wrap_pi(double d) { return d - kTwoPi * std::floor((d + kPi) / kTwoPi); }

void amp_phase(std::span<const cplx> x, std::span<double> amp, std::span<double> phase) {
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double re = x[n].real(), im = x[n].imag();
    amp[n] = std::sqrt(re * re + im * im);
    phase[n] = (re == 0.0 && im == 0.0) ? 0.0 : std::atan2(im, re);
  }
}

void freq_from_phase(std::span<const double> phase, std::span<double> freq) {
  for (std::size_t n = 0; n + 1 < phase.size(); ++n) freq[n] = wrap_pi(phase[n + 1] - phase[n]) / kTwoPi;
}

struct Moments {
  double mean = 0, std = 0, m3 = 0, m4 = 0;  // central moments, divisor = size
};

Moments moments(std::span<const double> v) {
  Moments m;
  const double n = static_cast<double>(v.size());
  double s = 0.0;
  for (double e : v) s += e;
  m.mean = s / n;
  double s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (double e : v) {
    const double d = e - m.mean;
    const double d2 = d * d;
    s2 += d2;
    s3 += d2 * d;
    s4 += d2 * d2;
  }
  m.std = std::sqrt(s2 / n);
  m.m3 = s3 / n;
  m.m4 = s4 / n;
  return m;
}

double population_variance(std::span<const double> v) {
  const double s = moments(v).std;
  return s * s;
}

void fill_rtable(std::span<const cplx> x, RTable& r) {
  r[0] = cplx{};
  for (int t = 1; t <= kAcLags; ++t) r[t] = autocorr(x, t);
}

double r_at(std::span<const cplx> x, const RTable& r, int tau) {
  return std::abs(tau <= kAcLags ? r[tau] : autocorr(x, tau));
}

void power_spectrum(std::span<const cplx> x, std::span<cplx> buf, std::span<double> power, bool squared) {
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double re = x[n].real(), im = x[n].imag();
    buf[n] = squared ? cplx(re * re - im * im, 2.0 * re * im) : x[n];
  }
  fft_inplace(buf, false);
  for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(buf[k]);
}

// ---- group kernels on shared intermediates ----

void k_autocorr32(std::span<const cplx> x, const RTable& r, std::span<double> out) {
  const auto delays = delay_set(x.size());
  for (std::size_t i = 0; i < delays.size(); ++i) out[i] = r_at(x, r, delays[i]);
}

void k_cumulants(std::span<const cplx> x, std::span<double> out) {
  const double n = static_cast<double>(x.size());
  cplx mean{};
  for (const auto& v : x) mean += v;
  mean /= n;
  cplx m20{}, m40{}, m41{};
  double m21 = 0.0, m42 = 0.0;
  for (const auto& v : x) {
    const cplx b = v - mean;
    const cplx b2 = b * b;
    const double p = std::norm(b);
    m20 += b2;
    m21 += p;
    m40 += b2 * b2;
    m41 += b2 * p;
    m42 += p * p;
  }
  m20 /= n;
  m21 /= n;
  m40 /= n;
  m41 /= n;
  m42 /= n;
  const cplx c40 = m40 - 3.0 * m20 * m20;
  const cplx c41 = m41 - 3.0 * m20 * m21;
  const double c42 = m42 - std::norm(m20) - 2.0 * m21 * m21;
  out[0] = m20.real();
  out[1] = m20.imag();
  out[2] = m21;
  out[3] = c40.real();
  out[4] = c40.imag();
  out[5] = c41.real();
  out[6] = c41.imag();
  out[7] = c42;
}

void k_inst_stats(std::span<const double> amp, std::span<const double> freq, std::span<double> out) {
  const Moments fm = moments(freq);
  const Moments am = moments(amp);
  double da = 0.0, df = 0.0, amax = 0.0;
  for (std::size_t n = 0; n + 1 < amp.size(); ++n) da += std::abs(amp[n + 1] - amp[n]);
  for (std::size_t n = 0; n + 1 < freq.size(); ++n) df += std::abs(freq[n + 1] - freq[n]);
  for (double a : amp) amax = std::max(amax, a);
  out[0] = fm.mean;
  out[1] = fm.std;
  out[2] = am.mean;
  out[3] = am.std;
  out[4] = da;
  out[5] = df;
  out[6] = am.mean > 0.0 ? amax / am.mean : 0.0;
}

void k_chirp(std::span<const double> freq, std::span<double> out) {
  const double n = static_cast<double>(freq.size());
  const double nbar = (n - 1.0) / 2.0;  // (N-2)/2 for N-1 points
  double fbar = 0.0;
  for (double f : freq) fbar += f;
  fbar /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    const double d = static_cast<double>(i) - nbar;
    num += d * (freq[i] - fbar);
    den += d * d;
  }
  out[0] = den > 0.0 ? num / den : 0.0;
  out[1] = 0.0;
  out[2] = 0.0;
}

double amp_kurtosis(const Moments& am) {
  if (am.std <= kDegenerate * am.mean) return 0.0;
  const double s2 = am.std * am.std;
  return am.m4 / (s2 * s2);
}

void k_global_td(std::span<const double> amp, const RTable& r, std::span<double> out) {
  const Moments am = moments(amp);

  std::array<double, kAcLags> mags{};
  for (int t = 1; t <= kAcLags; ++t) mags[t - 1] = std::abs(r[t]);
  const Moments rm = moments(mags);

  std::array<double, kPhaseLags> lags{}, psi{};
  for (int t = 1; t <= kPhaseLags; ++t) {
    lags[t - 1] = t;
    psi[t - 1] = std::arg(r[t]);
  }
  const QuadraticFit fit = fit_quadratic(lags, psi);

  out[0] = am.mean;
  out[1] = am.std;
  out[2] = amp_kurtosis(am);
  out[3] = rm.mean;
  out[4] = rm.std;
  out[5] = fit.c1;
  out[6] = fit.c2;
  out[7] = population_variance(psi);
}

void k_spectral(std::span<const double> power, std::span<double> out) {
  const SpectralStats s = spectral_stats(power);
  out[0] = s.centroid;
  out[1] = s.variance;
  out[2] = s.flatness;
  out[3] = s.low_ratio;
  out[4] = s.rms_bandwidth;
  out[5] = s.peak;
}

void k_extended(std::span<const double> amp, std::span<const double> phase, std::span<const double> freq,
                const RTable& r, std::span<const double> power, std::span<const double> power_sq,
                std::span<double> out) {
  const std::size_t n = amp.size();
  const Moments am = moments(amp);
  const Moments fm = moments(freq);

  double amax2 = 0.0, a2sum = 0.0, da = 0.0;
  for (double a : amp) {
    amax2 = std::max(amax2, a * a);
    a2sum += a * a;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) da += std::abs(amp[i + 1] - amp[i]);
  const double a2mean = a2sum / static_cast<double>(n);

  const bool amp_flat = am.std <= kDegenerate * am.mean;
  const bool freq_flat = fm.std <= kDegenerate;

  double dfmean = 0.0;
  for (std::size_t i = 0; i + 1 < freq.size(); ++i) dfmean += freq[i + 1] - freq[i];
  dfmean /= static_cast<double>(freq.size() - 1);
  double dfvar = 0.0;
  for (std::size_t i = 0; i + 1 < freq.size(); ++i) {
    const double d = (freq[i + 1] - freq[i]) - dfmean;
    dfvar += d * d;
  }
  dfvar /= static_cast<double>(freq.size() - 1);

  int peak_lag = 1;
  double peak = std::abs(r[1]);
  for (int t = 2; t <= kAcLags; ++t) {
    const double m = std::abs(r[t]);
    if (m > peak) {
      peak = m;
      peak_lag = t;
    }
  }
  int width = 0;
  for (int t = 1; t <= kAcLags; ++t)
    if (std::abs(r[t]) >= 0.5 * peak) ++width;

  const SpectralStats spec = spectral_stats(power);
  const double amean_floor = std::max(am.mean, 1e-12);

  out[0] = a2mean > 0.0 ? amax2 / a2mean : 0.0;
  out[1] = amp_flat ? 0.0 : am.m3 / (am.std * am.std * am.std);
  out[2] = freq_flat ? 0.0 : fm.m3 / (fm.std * fm.std * fm.std);
  out[3] = freq_flat ? 0.0 : fm.m4 / (fm.std * fm.std * fm.std * fm.std);
  out[4] = am.std / amean_floor;
  out[5] = fm.std / 0.5;
  out[6] = dfvar;
  out[7] = peak_lag;
  out[8] = width;
  out[9] = spec.skewness;
  out[10] = spec.kurtosis;
  out[11] = spec.band10;
  out[12] = population_variance(phase);
  out[13] = spectral_flatness(power_sq);
  out[14] = da / (static_cast<double>(n - 1) * amean_floor);
  out[15] = spec.high_ratio;
}

void check_length(std::span<const cplx> x) {
  if (!is_pow2(x.size()) || x.size() < 256) {
    throw InputError("features: segment length " + std::to_string(x.size()) +
                     " must be a power of two >= 256");
  }
}

// Runtime-sized intermediates for the per-group entry points.
struct Buffers {
  std::vector<double> amp, phase, freq;
  explicit Buffers(std::span<const cplx> x) : amp(x.size()), phase(x.size()), freq(x.size() - 1) {
    amp_phase(x, amp, phase);
    freq_from_phase(phase, freq);
  }
};

std::vector<double> spectrum_of(std::span<const cplx> x, bool squared) {
  std::vector<cplx> buf(x.size());
  std::vector<double> p(x.size() / 2 + 1);
  power_spectrum(x, buf, p, squared);
  return p;
}

template <std::size_t N>
struct Scratch {
  std::array<double, N> amp;
  std::array<double, N> phase;
  std::array<double, N - 1> freq;
  std::array<cplx, N> buf;
  std::array<double, N / 2 + 1> power;
  std::array<double, N / 2 + 1> power_sq;
  RTable r;
};

template <std::size_t N>
FeatureVector extract_fixed(std::span<const cplx> x) {
  Scratch<N> s;
  amp_phase(x, s.amp, s.phase);
  freq_from_phase(s.phase, s.freq);
  fill_rtable(x, s.r);
  power_spectrum(x, s.buf, s.power, false);
  power_spectrum(x, s.buf, s.power_sq, true);

  FeatureVector fv;
  auto out = std::span<double>(fv.values);
  k_autocorr32(x, s.r, out.subspan(feat::kAutocorr, 32));
  k_cumulants(x, out.subspan(feat::kCumulants, 8));
  k_inst_stats(s.amp, s.freq, out.subspan(feat::kInstStats, 7));
  k_chirp(s.freq, out.subspan(feat::kChirp, 3));
  k_global_td(s.amp, s.r, out.subspan(feat::kGlobalTd, 8));
  k_spectral(s.power, out.subspan(feat::kSpectral, 6));
  k_extended(s.amp, s.phase, s.freq, s.r, s.power, s.power_sq, out.subspan(feat::kExtended, 16));
  return fv;
}

constexpr std::array<std::string_view, 48> kNamedTail = {
    "Re C20", "Im C20", "C21", "Re C40", "Im C40", "Re C41", "Im C41", "C42",
    "f mean", "f std", "a mean", "a std", "sum|da|", "sum|df|", "a max/mean",
    "chirp slope", "reserved", "reserved",
    "a mean (g)", "a std (g)", "K_a", "M_ac", "S_ac", "c1", "c2", "var psi",
    "C_f", "var_f", "F_flat", "R_low", "B_RMS", "P_max",
    "PAPR", "skew a", "skew f", "kurt f", "a std norm", "f std norm", "var df", "I_peak",
    "W_ac", "skew p", "kurt p", "B_10", "var phi", "F_flat2", "M_da", "H_high"};

}  // namespace

std::string_view feature_name(std::size_t index) {
  static const std::array<std::string, 32> lag_names = [] {
    std::array<std::string, 32> names;
    for (std::size_t i = 0; i < 32; ++i) names[i] = "|R(" + std::to_string(kDelaySet[i]) + ")|";
    return names;
  }();
  if (index < 32) return lag_names[index];
  if (index < kFeatureCount) return kNamedTail[index - 32];
  throw InputError("feature_name: index out of range");
}

std::array<int, 32> delay_set(std::size_t n) {
  const int N = static_cast<int>(n);
  const int ns = 32;
  const int m = N / ns;
  return {1,      2,      4,       ns,     m,      2 * ns, 2 * m,  ns + m, ns / 2, m / 2, 3,
          7,      15,     31,      ns - 1, m - 1,  ns + 1, m + 1,  N / 4,  N / 8,  N / 16, N / 32,
          N / 2 - 1, 5,   6,       9,      10,     12,     24,     48,     3 * m,  4 * ns};
}

cplx autocorr(std::span<const cplx> x, int tau) {
  const auto n = static_cast<int>(x.size());
  if (tau < 1 || tau > n - 1) {
    throw InputError("autocorr: lag " + std::to_string(tau) + " outside [1, " + std::to_string(n - 1) + "]");
  }
  // Four interleaved partial sums, combined in a fixed order at the end.
  const int len = n - tau;
  const double* a = reinterpret_cast<const double*>(x.data());
  const double* b = a + 2 * tau;
  double re[4] = {}, im[4] = {};
  int i = 0;
  for (; i + 4 <= len; i += 4) {
    for (int k = 0; k < 4; ++k) {
      const double ar = a[2 * (i + k)], ai = a[2 * (i + k) + 1];
      const double br = b[2 * (i + k)], bi = b[2 * (i + k) + 1];
      re[k] += ar * br + ai * bi;
      im[k] += ai * br - ar * bi;
    }
  }
  for (int k = 0; i < len; ++i, ++k) {
    const double ar = a[2 * i], ai = a[2 * i + 1];
    const double br = b[2 * i], bi = b[2 * i + 1];
    re[k] += ar * br + ai * bi;
    im[k] += ai * br - ar * bi;
  }
  const double sre = (re[0] + re[1]) + (re[2] + re[3]);
  const double sim = (im[0] + im[1]) + (im[2] + im[3]);
  return {sre / n, sim / n};
}

std::vector<double> inst_freq(std::span<const cplx> x) {
  if (x.size() < 2) return {};
  std::vector<double> amp(x.size()), phase(x.size()), freq(x.size() - 1);
  amp_phase(x, amp, phase);
  freq_from_phase(phase, freq);
  return freq;
}

QuadraticFit fit_quadratic(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size() || t.size() < 3) throw InputError("fit_quadratic: need >= 3 matched points");
  // Normal equations A c = b with A[i][j] = sum t^(i+j), b[i] = sum t^i y.
  std::array<double, 5> s{};
  std::array<double, 3> b{};
  for (std::size_t i = 0; i < t.size(); ++i) {
    double p = 1.0;
    for (int k = 0; k < 5; ++k) {
      s[k] += p;
      if (k < 3) b[k] += p * y[i];
      p *= t[i];
    }
  }
  std::array<std::array<double, 4>, 3> a = {{{s[0], s[1], s[2], b[0]},
                                             {s[1], s[2], s[3], b[1]},
                                             {s[2], s[3], s[4], b[2]}}};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    if (a[col][col] == 0.0) throw NumericError("fit_quadratic: singular system");
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return {a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]};
}

double spectral_flatness(std::span<const double> power) {
  double total = 0.0;
  for (double p : power) total += p;
  if (!(total > 0.0)) return 0.0;
  const double k = static_cast<double>(power.size());
  double logsum = 0.0;
  for (double p : power) logsum += std::log(p / total + kFlatnessEps);
  return std::exp(logsum / k) / (1.0 / k);
}

SpectralStats spectral_stats(std::span<const double> power) {
  SpectralStats s;
  const std::size_t K = power.size();
  if (K < 2) throw InputError("spectral_stats: need at least two bins");
  const std::size_t half = K - 1;  // N/2
  double total = 0.0, peak = 0.0;
  for (double p : power) {
    total += p;
    peak = std::max(peak, p);
  }
  if (!(total > 0.0)) return s;

  double c = 0.0, m2 = 0.0, low = 0.0, high = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double fk = static_cast<double>(k) / static_cast<double>(half);
    const double p = power[k] / total;
    c += fk * p;
    m2 += fk * fk * p;
    if (k <= half / 2) low += power[k];
    if (4 * k >= 3 * half) high += power[k];
  }
  s.centroid = c;
  s.variance = m2 - c * c;
  s.rms_bandwidth = std::sqrt(std::max(s.variance, 0.0));
  s.flatness = spectral_flatness(power);
  s.low_ratio = low / total;
  s.high_ratio = high / total;
  s.peak = peak;

  if (s.rms_bandwidth > kDegenerate) {
    double m3 = 0.0, m4 = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double z = (static_cast<double>(k) / static_cast<double>(half) - c) / s.rms_bandwidth;
      const double p = power[k] / total;
      m3 += z * z * z * p;
      m4 += z * z * z * z * p;
    }
    s.skewness = m3;
    s.kurtosis = m4;
  }
  std::size_t above = 0;
  for (double p : power)
    if (p >= peak / 10.0) ++above;
  s.band10 = static_cast<double>(above) / static_cast<double>(K);
  return s;
}

std::array<double, 32> feat_autocorr32(std::span<const cplx> x) {
  check_length(x);
  RTable r;
  fill_rtable(x, r);
  std::array<double, 32> out{};
  k_autocorr32(x, r, out);
  return out;
}

std::array<double, 8> feat_cumulants(std::span<const cplx> x) {
  check_length(x);
  std::array<double, 8> out{};
  k_cumulants(x, out);
  return out;
}

std::array<double, 7> feat_inst_stats(std::span<const cplx> x) {
  check_length(x);
  Buffers b(x);
  std::array<double, 7> out{};
  k_inst_stats(b.amp, b.freq, out);
  return out;
}

std::array<double, 3> feat_chirp(std::span<const cplx> x) {
  check_length(x);
  Buffers b(x);
  std::array<double, 3> out{};
  k_chirp(b.freq, out);
  return out;
}

std::array<double, 8> feat_global_td(std::span<const cplx> x) {
  check_length(x);
  Buffers b(x);
  RTable r;
  fill_rtable(x, r);
  std::array<double, 8> out{};
  k_global_td(b.amp, r, out);
  return out;
}

std::array<double, 6> feat_spectral(std::span<const cplx> x) {
  check_length(x);
  const auto p = spectrum_of(x, false);
  std::array<double, 6> out{};
  k_spectral(p, out);
  return out;
}

std::array<double, 16> feat_extended(std::span<const cplx> x) {
  check_length(x);
  Buffers b(x);
  RTable r;
  fill_rtable(x, r);
  const auto p = spectrum_of(x, false);
  const auto p2 = spectrum_of(x, true);
  std::array<double, 16> out{};
  k_extended(b.amp, b.phase, b.freq, r, p, p2, out);
  return out;
}

FeatureVector extract_features(std::span<const cplx> x) {
  if (x.size() != kSegmentLength) {
    throw InputError("extract_features: expected " + std::to_string(kSegmentLength) + " samples, got " +
                     std::to_string(x.size()));
  }
  return extract_fixed<kSegmentLength>(x);
}

FeatureVector extract_features(const IqSegment& seg) { return extract_features(seg.samples); }

FeatureVector extract_features_sized(std::span<const cplx> x) {
  switch (x.size()) {
    case 256: return extract_fixed<256>(x);
    case 1024: return extract_fixed<1024>(x);
    case 4096: return extract_fixed<4096>(x);
    default: throw InputError("extract_features_sized: unsupported length " + std::to_string(x.size()));
  }
}

std::vector<FeatureVector> extract_batch_serial(std::span<const IqSegment> segs) {
  std::vector<FeatureVector> out(segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) out[i] = extract_features(segs[i]);
  return out;
}

std::vector<FeatureVector> extract_batch(std::span<const IqSegment> segs) {
  for (const auto& seg : segs) {
    if (seg.samples.size() != kSegmentLength)
      throw InputError("extract_batch: segment of length " + std::to_string(seg.samples.size()));
  }
  std::vector<FeatureVector> out(segs.size());
  const auto n = static_cast<std::ptrdiff_t>(segs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = extract_features(segs[i]);
  return out;
}

}  // namespace wavid
