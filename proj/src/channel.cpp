// SPDX-License-Identifier: Apache-2.0
#include "wavid/channel.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include "wavid/rng.hpp"

namespace wavid {

// 3GPP TR 38.901 Table 7.7.2-3, TDL-C (normalized delay, power in dB).
const std::array<TdlTap, 24> kTdlcProfile = {{
    {0.0000, -4.4},  {0.2099, -1.2},  {0.2219, -3.5},  {0.2329, -5.2},  {0.2176, -2.5},
    {0.6366, 0.0},   {0.6448, -2.2},  {0.6560, -3.9},  {0.6584, -7.4},  {0.7935, -7.1},
    {0.8213, -10.7}, {0.9336, -11.1}, {1.2285, -5.1},  {1.3083, -6.8},  {2.1704, -8.7},
    {2.7105, -13.2}, {4.2589, -13.9}, {4.6003, -13.9}, {5.4902, -15.8}, {5.6077, -17.1},
    {6.3065, -16.0}, {6.6374, -15.7}, {7.0427, -21.6}, {8.6523, -22.8},
}};

void ChannelSpec::validate() const {
  if (!std::isfinite(snr_db)) throw ConfigError("channel: snr_db must be finite");
  if (kind == ChannelKind::tdlc) {
    if (!(delay_spread_ns > 0.0)) throw ConfigError("channel: delay_spread_ns must be > 0");
    if (!(speed_kmh >= 0.0)) throw ConfigError("channel: speed_kmh must be >= 0");
  }
  if (!(sample_rate_hz > 0.0)) throw ConfigError("channel: sample_rate_hz must be > 0");
}

double max_doppler_hz(double speed_kmh, double carrier_hz) {
  constexpr double c = 299792458.0;
  return speed_kmh / 3.6 * carrier_hz / c;
}

IqSegment apply_awgn(const IqSegment& seg, double snr_db, std::uint64_t seed) {
  const double ps = mean_power(seg.samples);
  if (!(ps > 0.0)) throw NumericError("apply_awgn: input segment has zero power");
  const double noise_var = ps / std::pow(10.0, snr_db / 10.0);
  const double sigma = std::sqrt(noise_var / 2.0);

  Rng rng = make_rng(seed, Stream::noise);
  std::normal_distribution<double> gauss(0.0, 1.0);
  IqSegment out = seg;
  for (auto& v : out.samples) {
    const double i = gauss(rng);
    const double q = gauss(rng);
    v += cplx(sigma * i, sigma * q);
  }
  out.snr_db = snr_db;
  if (out.channel == ChannelTag::none) out.channel = ChannelTag::awgn;
  return out;
}

TdlcRealization make_tdlc(const ChannelSpec& spec, std::size_t length) {
  if (spec.kind != ChannelKind::tdlc) throw ConfigError("make_tdlc: channel kind is not tdlc");
  spec.validate();

  std::map<int, double> merged;
  for (const auto& tap : kTdlcProfile) {
    const double delay_s = tap.normalized_delay * spec.delay_spread_ns * 1e-9;
    const int d = static_cast<int>(std::lround(delay_s * spec.sample_rate_hz));
    merged[d] += std::pow(10.0, tap.power_db / 10.0);
  }
  double total = 0.0;
  for (const auto& [d, p] : merged) total += p;

  TdlcRealization chan;
  for (const auto& [d, p] : merged) {
    chan.tap_delays_samples.push_back(d);
    chan.tap_powers_linear.push_back(p / total);
  }

  // Sum-of-sinusoids Rayleigh fading with a classical Doppler spectrum:
  // g[n] = sqrt(P/S) sum_s exp(j(2pi fd cos(a_s) n / fs + phi_s)).
  const double fd_norm = max_doppler_hz(spec.speed_kmh, spec.carrier_hz) / spec.sample_rate_hz;
  Rng rng = make_rng(spec.seed, Stream::fading);
  chan.gains.resize(chan.tap_delays_samples.size());
  for (std::size_t l = 0; l < chan.gains.size(); ++l) {
    std::array<double, kSinusoidsPerTap> freq{};
    std::array<double, kSinusoidsPerTap> phase{};
    for (int s = 0; s < kSinusoidsPerTap; ++s) {
      freq[s] = fd_norm * std::cos(2.0 * std::numbers::pi * uniform01(rng));
      phase[s] = 2.0 * std::numbers::pi * uniform01(rng);
    }
    const double amp = std::sqrt(chan.tap_powers_linear[l] / kSinusoidsPerTap);
    auto& g = chan.gains[l];
    g.resize(length);
    for (std::size_t n = 0; n < length; ++n) {
      cplx acc = 0.0;
      for (int s = 0; s < kSinusoidsPerTap; ++s) {
        acc += std::polar(1.0, 2.0 * std::numbers::pi * freq[s] * static_cast<double>(n) + phase[s]);
      }
      g[n] = amp * acc;
    }
  }
  return chan;
}

IqSegment apply_tdlc(const IqSegment& seg, const TdlcRealization& chan, bool renormalize) {
  const std::size_t n = seg.samples.size();
  if (chan.gains.size() != chan.tap_delays_samples.size())
    throw InputError("apply_tdlc: realization has mismatched tap arrays");
  for (const auto& g : chan.gains) {
    if (g.size() != n) {
      throw InputError("apply_tdlc: realization length " + std::to_string(g.size()) +
                       " does not match segment length " + std::to_string(n));
    }
  }
  IqSegment out = seg;
  std::fill(out.samples.begin(), out.samples.end(), cplx{});
  for (std::size_t l = 0; l < chan.gains.size(); ++l) {
    const auto d = static_cast<std::size_t>(chan.tap_delays_samples[l]);
    const auto& g = chan.gains[l];
    for (std::size_t i = d; i < n; ++i) out.samples[i] += g[i] * seg.samples[i - d];
  }
  if (renormalize) {
    const double p = mean_power(out.samples);
    if (!(p > 0.0)) throw NumericError("apply_tdlc: channel output has zero power");
    const double s = 1.0 / std::sqrt(p);
    for (auto& v : out.samples) v *= s;
  }
  out.channel = ChannelTag::tdlc;
  return out;
}

}  // namespace wavid
