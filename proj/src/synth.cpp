// SPDX-License-Identifier: Apache-2.0
#include "wavid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wavid/fft.hpp"
#include "wavid/rng.hpp"

namespace wavid {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr auto N = static_cast<int>(kSegmentLength);

// Symbol values (not points) of a scheme; used by waveforms that consume the
// payload as integers rather than constellation points.
std::vector<unsigned> random_symbol_values(std::size_t count, ModulationScheme m, Rng& rng) {
  const int bps = bits_per_symbol(m);
  std::vector<unsigned> out(count);
  for (auto& v : out) v = static_cast<unsigned>(rng() >> (64 - bps));
  return out;
}

std::vector<cplx> draw_points(std::size_t count, ModulationScheme m, Rng& rng) {
  const auto& table = constellation(m);
  const int bps = bits_per_symbol(m);
  std::vector<cplx> out(count);
  for (auto& v : out) v = table[rng() >> (64 - bps)];
  return out;
}

std::vector<cplx> synth_ofdm(ModulationScheme m, Rng& rng) {
  const int nfft = kWaveformParams.ofdm_fft;
  const int cp = kWaveformParams.ofdm_cp;
  const int sym_len = nfft + cp;
  std::vector<cplx> out;
  out.reserve(N + sym_len);
  const double scale = std::sqrt(static_cast<double>(nfft));
  while (static_cast<int>(out.size()) < N) {
    auto sym = draw_points(nfft, m, rng);
    fft_inplace(sym, true);
    for (auto& v : sym) v *= scale;
    out.insert(out.end(), sym.end() - cp, sym.end());
    out.insert(out.end(), sym.begin(), sym.end());
  }
  out.resize(N);
  return out;
}

// Delay-Doppler grid -> time domain: ISFFT (Doppler->time, delay->frequency)
// followed by a rectangular-pulse Heisenberg transform (frequency->time).
std::vector<cplx> synth_otfs(ModulationScheme m, Rng& rng) {
  const int M = kWaveformParams.dd_delay_bins;
  const int Nd = kWaveformParams.dd_doppler_bins;
  auto dd = draw_points(static_cast<std::size_t>(M * Nd), m, rng);  // dd[l * Nd + k]

  // Embedded pilot: one impulse at (M/2, Nd/2) inside a guard band spanning
  // every Doppler bin; the pilot carries the energy of the guard region.
  const int lp = M / 2;
  const int guard = kWaveformParams.dd_pilot_guard;
  for (int l = lp - guard; l <= lp + guard; ++l)
    for (int k = 0; k < Nd; ++k) dd[l * Nd + k] = 0.0;
  dd[lp * Nd + Nd / 2] = std::sqrt(static_cast<double>((2 * guard + 1) * Nd));

  // ISFFT: tf[n][m] = 1/sqrt(NM) sum_k sum_l dd[l][k] e^{j2pi(nk/N - ml/M)}
  std::vector<cplx> tf(static_cast<std::size_t>(Nd * M));  // tf[n * M + m]
  std::vector<cplx> col(Nd), row(M);
  std::vector<cplx> tmp(static_cast<std::size_t>(M * Nd));  // after Doppler IFFT, tmp[l * Nd + n]
  for (int l = 0; l < M; ++l) {
    for (int k = 0; k < Nd; ++k) col[k] = dd[l * Nd + k];
    fft_inplace(col, true);
    for (int n = 0; n < Nd; ++n) tmp[l * Nd + n] = col[n] * static_cast<double>(Nd);
  }
  for (int n = 0; n < Nd; ++n) {
    for (int l = 0; l < M; ++l) row[l] = tmp[l * Nd + n];
    fft_inplace(row, false);
    for (int mm = 0; mm < M; ++mm)
      tf[n * M + mm] = row[mm] / std::sqrt(static_cast<double>(Nd * M));
  }

  // Heisenberg, rectangular pulse: s[nM + t] = 1/sqrt(M) sum_m tf[n][m] e^{j2pi mt/M}
  std::vector<cplx> out(static_cast<std::size_t>(N));
  for (int n = 0; n < Nd; ++n) {
    for (int mm = 0; mm < M; ++mm) row[mm] = tf[n * M + mm];
    fft_inplace(row, true);
    for (int t = 0; t < M; ++t) out[n * M + t] = row[t] * std::sqrt(static_cast<double>(M));
  }
  return out;
}

// OTFS grid with an SRRC sub-pulse along the delay axis (circular over the
// frame, one sample per delay bin).
std::vector<cplx> synth_oddm(ModulationScheme m, Rng& rng) {
  const auto base = synth_otfs(m, rng);
  const auto taps = srrc_taps(kWaveformParams.oddm_rolloff, kWaveformParams.oddm_span, 1);
  const int half = static_cast<int>(taps.size()) / 2;
  std::vector<cplx> out(base.size());
  for (int n = 0; n < N; ++n) {
    cplx acc = 0.0;
    for (int i = 0; i < static_cast<int>(taps.size()); ++i) {
      const int src = ((n - i + half) % N + N) % N;
      acc += taps[i] * base[src];
    }
    out[n] = acc;
  }
  return out;
}

std::vector<cplx> synth_fbmc(ModulationScheme m, Rng& rng) {
  const int M = kWaveformParams.fbmc_subcarriers;
  const auto proto = phydyas_prototype(M, kWaveformParams.fbmc_overlap);
  const int L = static_cast<int>(proto.size());
  const int hop = M / 2;
  constexpr int slots = 80;  // OQAM real-symbol time slots
  const int total = (slots - 1) * hop + L;

  std::vector<cplx> stream(static_cast<std::size_t>(total));
  std::vector<cplx> v(M);
  std::vector<cplx> points;
  for (int n = 0; n < slots; ++n) {
    if (n % 2 == 0) points = draw_points(M, m, rng);
    for (int k = 0; k < M; ++k) {
      const double a = (n % 2 == 0) ? points[k].real() : points[k].imag();
      // theta = j^{k+n}; (-1)^{kn} absorbs the slot offset of the modulating exponential.
      const cplx theta = std::polar(1.0, kPi / 2.0 * ((k + n) % 4));
      const double sign = ((k * n) % 2 == 0) ? 1.0 : -1.0;
      v[k] = a * theta * sign;
    }
    fft_inplace(v, true);
    for (int t = 0; t < L; ++t) stream[n * hop + t] += v[t % M] * static_cast<double>(M) * proto[t];
  }
  const int offset = (total - N) / 2;
  return {stream.begin() + offset, stream.begin() + offset + N};
}

std::vector<cplx> synth_ufmc(ModulationScheme m, Rng& rng) {
  const int nfft = kWaveformParams.ufmc_fft;
  const int bands = kWaveformParams.ufmc_subbands;
  const int width = nfft / bands;
  const int flen = kWaveformParams.ufmc_filter_len;
  const auto window = chebyshev_window(flen, kWaveformParams.ufmc_sidelobe_db);
  const int sym_len = nfft + flen - 1;

  std::vector<std::vector<cplx>> filters(bands, std::vector<cplx>(flen));
  for (int b = 0; b < bands; ++b) {
    const double centre = b * width + (width - 1) / 2.0;
    for (int l = 0; l < flen; ++l) {
      filters[b][l] =
          window[l] * std::polar(1.0, 2.0 * kPi * centre * (l - (flen - 1) / 2.0) / nfft);
    }
  }

  std::vector<cplx> out;
  out.reserve(N + sym_len);
  std::vector<cplx> sub(nfft);
  while (static_cast<int>(out.size()) < N) {
    std::vector<cplx> sym(static_cast<std::size_t>(sym_len));
    const auto pts = draw_points(nfft, m, rng);
    for (int b = 0; b < bands; ++b) {
      std::fill(sub.begin(), sub.end(), cplx{});
      for (int k = b * width; k < (b + 1) * width; ++k) sub[k] = pts[k];
      fft_inplace(sub, true);
      for (int n = 0; n < nfft; ++n)
        for (int l = 0; l < flen; ++l) sym[n + l] += sub[n] * filters[b][l];
    }
    out.insert(out.end(), sym.begin(), sym.end());
  }
  out.resize(N);
  return out;
}

std::vector<cplx> synth_dsss(ModulationScheme m, Rng& rng) {
  const int chips = kWaveformParams.dsss_code_len;
  const auto data = draw_points(static_cast<std::size_t>(N / chips), m, rng);
  std::vector<cplx> out(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) out[n] = data[n / chips] * static_cast<double>(kDsssCode[n % chips]);
  return out;
}

// Payload bits select the cyclic shift of the base up-chirp; the scheme only
// sets how many bits one chirp consumes.
std::vector<cplx> synth_lora(ModulationScheme m, Rng& rng) {
  const int sf = kWaveformParams.lora_sf;
  const int nc = 1 << sf;
  const int bps = bits_per_symbol(m);
  const auto values = random_symbol_values(static_cast<std::size_t>(N / nc), m, rng);
  std::vector<cplx> out(static_cast<std::size_t>(N));
  for (int c = 0; c < N / nc; ++c) {
    const unsigned v = values[c];
    const int shift = bps <= sf ? static_cast<int>(v << (sf - bps)) : static_cast<int>(v >> (bps - sf));
    for (int n = 0; n < nc; ++n) {
      const double k = static_cast<double>((n + shift) % nc);
      const double cycles = k * k / (2.0 * nc) - k / 2.0;
      out[c * nc + n] = std::polar(1.0, 2.0 * kPi * (cycles - std::floor(cycles)));
    }
  }
  return out;
}

std::vector<cplx> synth_nbiot(ModulationScheme m, Rng& rng) {
  const int nfft = kWaveformParams.nbiot_fft;
  const int active = kWaveformParams.nbiot_active;
  const int cp = kWaveformParams.nbiot_cp;
  std::vector<cplx> out;
  std::vector<cplx> sym(nfft);
  for (int s = 0; s < kWaveformParams.nbiot_symbols; ++s) {
    std::fill(sym.begin(), sym.end(), cplx{});
    const auto pts = draw_points(active, m, rng);
    for (int i = 0; i < active; ++i) {
      const int k = i - active / 2;
      sym[(k + nfft) % nfft] = pts[i];
    }
    fft_inplace(sym, true);
    out.insert(out.end(), sym.end() - cp, sym.end());
    out.insert(out.end(), sym.begin(), sym.end());
  }
  out.resize(N);  // 4 x 272 samples exceed the window; the last symbol is cut
  return out;
}

int fsk_order(ModulationScheme m) { return m == ModulationScheme::QPSK ? 4 : 8; }

std::vector<cplx> phase_accumulate(const std::vector<double>& freq) {
  std::vector<cplx> out(freq.size());
  double phase = 0.0;
  for (std::size_t n = 0; n < freq.size(); ++n) {
    out[n] = std::polar(1.0, 2.0 * kPi * phase);
    phase += freq[n];
    phase -= std::floor(phase);
  }
  return out;
}

std::vector<cplx> synth_gfsk(ModulationScheme m, Rng& rng) {
  const int sps = kWaveformParams.fsk_samples_per_symbol;
  const int order = fsk_order(m);
  const double h = kWaveformParams.gfsk_mod_index;
  constexpr int guard = 2;  // symbols trimmed on each side after filtering
  const int nsym = N / sps + 2 * guard;
  const auto values = random_symbol_values(static_cast<std::size_t>(nsym), m, rng);

  std::vector<double> nrz(static_cast<std::size_t>(nsym * sps));
  for (int s = 0; s < nsym; ++s) {
    const double level = 2.0 * (values[s] % order) - (order - 1.0);
    for (int i = 0; i < sps; ++i) nrz[s * sps + i] = h * level / (2.0 * sps);
  }

  // Gaussian frequency-shaping kernel spanning 3 symbols, unit DC gain.
  const double bt = kWaveformParams.gfsk_bt;
  const double sigma = std::sqrt(std::log(2.0)) / (2.0 * kPi * bt) * sps;
  const int half = 3 * sps / 2;
  std::vector<double> g(static_cast<std::size_t>(2 * half + 1));
  double gsum = 0.0;
  for (int i = -half; i <= half; ++i) {
    g[i + half] = std::exp(-0.5 * (i / sigma) * (i / sigma));
    gsum += g[i + half];
  }
  for (auto& v : g) v /= gsum;

  std::vector<double> freq(nrz.size(), 0.0);
  for (int n = 0; n < static_cast<int>(nrz.size()); ++n) {
    double acc = 0.0;
    for (int i = -half; i <= half; ++i) {
      const int src = std::clamp(n - i, 0, static_cast<int>(nrz.size()) - 1);
      acc += g[i + half] * nrz[src];
    }
    freq[n] = acc;
  }
  auto full = phase_accumulate(freq);
  return {full.begin() + guard * sps, full.begin() + guard * sps + N};
}

std::vector<cplx> synth_mfsk(ModulationScheme m, Rng& rng) {
  const int sps = kWaveformParams.fsk_samples_per_symbol;
  const int order = fsk_order(m);
  const auto values = random_symbol_values(static_cast<std::size_t>(N / sps), m, rng);
  std::vector<double> freq(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) {
    const double tone = (values[n / sps] % order) - (order - 1.0) / 2.0;
    freq[n] = tone / sps;
  }
  return phase_accumulate(freq);
}

}  // namespace

void normalize_power(std::vector<cplx>& x) {
  const double p = mean_power(x);
  if (!(p > 0.0) || !std::isfinite(p)) throw NumericError("cannot normalize a zero-power signal");
  const double s = 1.0 / std::sqrt(p);
  for (auto& v : x) v *= s;
}

IqSegment synth_segment(WaveformClass w, ModulationScheme m, std::uint64_t seed) {
  if (!is_legal_pair(w, m)) {
    throw ConfigError("illegal waveform/modulation pairing: " + std::string(to_string(w)) + " with " +
                      std::string(to_string(m)));
  }
  Rng rng = make_rng(seed, Stream::payload);
  IqSegment seg;
  seg.waveform = w;
  seg.modulation = m;
  seg.seed = seed;
  switch (w) {
    case WaveformClass::OFDM: seg.samples = synth_ofdm(m, rng); break;
    case WaveformClass::OTFS: seg.samples = synth_otfs(m, rng); break;
    case WaveformClass::ODDM: seg.samples = synth_oddm(m, rng); break;
    case WaveformClass::FBMC: seg.samples = synth_fbmc(m, rng); break;
    case WaveformClass::UFMC: seg.samples = synth_ufmc(m, rng); break;
    case WaveformClass::DSSS: seg.samples = synth_dsss(m, rng); break;
    case WaveformClass::LoRa: seg.samples = synth_lora(m, rng); break;
    case WaveformClass::NBIoT: seg.samples = synth_nbiot(m, rng); break;
    case WaveformClass::GFSK: seg.samples = synth_gfsk(m, rng); break;
    case WaveformClass::MFSK: seg.samples = synth_mfsk(m, rng); break;
  }
  normalize_power(seg.samples);
  return seg;
}

std::vector<double> chebyshev_window(int n, double sidelobe_db) {
  if (n < 2) throw InputError("chebyshev_window: length must be >= 2");
  const double order = n - 1.0;
  const double beta = std::cosh(std::acosh(std::pow(10.0, std::abs(sidelobe_db) / 20.0)) / order);
  std::vector<cplx> p(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double x = beta * std::cos(kPi * k / n);
    double v;
    if (x > 1.0) {
      v = std::cosh(order * std::acosh(x));
    } else if (x < -1.0) {
      v = (2.0 * (n % 2) - 1.0) * std::cosh(order * std::acosh(-x));
    } else {
      v = std::cos(order * std::acos(x));
    }
    p[k] = (n % 2 == 0) ? v * std::polar(1.0, kPi * k / n) : cplx(v);
  }
  std::vector<double> spec(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    cplx acc = 0.0;
    for (int k = 0; k < n; ++k) acc += p[k] * std::polar(1.0, -2.0 * kPi * k * m / n);
    spec[m] = acc.real();
  }
  std::vector<double> w;
  if (n % 2) {
    const int h = (n + 1) / 2;
    for (int i = h - 1; i > 0; --i) w.push_back(spec[i]);
    for (int i = 0; i < h; ++i) w.push_back(spec[i]);
  } else {
    const int h = n / 2 + 1;
    for (int i = h - 1; i > 0; --i) w.push_back(spec[i]);
    for (int i = 1; i < h; ++i) w.push_back(spec[i]);
  }
  const double peak = *std::max_element(w.begin(), w.end());
  for (auto& v : w) v /= peak;
  return w;
}

std::vector<double> phydyas_prototype(int subcarriers, int overlap) {
  if (overlap != 4) throw ConfigError("phydyas_prototype: only overlap factor 4 is tabulated");
  constexpr std::array<double, 4> H = {1.0, 0.97195983, 0.70710678118654752, 0.23514695};
  const int len = overlap * subcarriers - 1;
  std::vector<double> p(static_cast<std::size_t>(len));
  for (int n = 0; n < len; ++n) {
    double v = H[0];
    for (int k = 1; k < overlap; ++k) {
      const double sign = (k % 2) ? -1.0 : 1.0;
      v += 2.0 * sign * H[k] * std::cos(2.0 * kPi * k * (n + 1) / (overlap * subcarriers));
    }
    p[n] = v;
  }
  double e = 0.0;
  for (double v : p) e += v * v;
  for (auto& v : p) v /= std::sqrt(e / subcarriers);
  return p;
}

std::vector<double> srrc_taps(double rolloff, int span, int sps) {
  const int len = span * sps + 1;
  std::vector<double> h(static_cast<std::size_t>(len));
  const double b = rolloff;
  for (int i = 0; i < len; ++i) {
    const double t = (i - span * sps / 2.0) / sps;
    if (std::abs(t) < 1e-12) {
      h[i] = 1.0 - b + 4.0 * b / kPi;
    } else if (b > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * b)) < 1e-12) {
      h[i] = b / std::sqrt(2.0) *
             ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * b)) + (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * b)));
    } else {
      h[i] = (std::sin(kPi * t * (1.0 - b)) + 4.0 * b * t * std::cos(kPi * t * (1.0 + b))) /
             (kPi * t * (1.0 - (4.0 * b * t) * (4.0 * b * t)));
    }
  }
  double e = 0.0;
  for (double v : h) e += v * v;
  for (auto& v : h) v /= std::sqrt(e);
  return h;
}

}  // namespace wavid
