// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "wavid/common.hpp"

namespace wavid {

enum class ChannelKind : std::uint8_t { awgn, tdlc };

struct ChannelSpec {
  ChannelKind kind = ChannelKind::awgn;
  double snr_db = 20.0;
  double delay_spread_ns = 300.0;
  double speed_kmh = 30.0;
  double carrier_hz = 4e9;
  double sample_rate_hz = 7.68e6;
  std::uint64_t seed = 0;

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

/// Normalized TDL-C power-delay profile: 3GPP TR 38.901 V16, Table 7.7.2-3.
struct TdlTap {
  double normalized_delay;
  double power_db;
};
extern const std::array<TdlTap, 24> kTdlcProfile;

inline constexpr int kSinusoidsPerTap = 16;

struct TdlcRealization {
  std::vector<int> tap_delays_samples;
  std::vector<double> tap_powers_linear;
  /// gains[l][n]: complex gain of tap l at sample n (power already included).
  std::vector<std::vector<cplx>> gains;
};

/// Circularly-symmetric AWGN at the requested SNR relative to the measured
/// input power. Throws NumericError on a zero-power input.
IqSegment apply_awgn(const IqSegment& seg, double snr_db, std::uint64_t seed);

/// Build a seeded TDL-C realization of `length` samples. Taps falling on the
/// same sample delay are merged by power addition; total power is 1.
TdlcRealization make_tdlc(const ChannelSpec& spec, std::size_t length = kSegmentLength);

/// y[n] = sum_l g_l[n] s[n - d_l] with zero history, rescaled to unit power
/// unless `renormalize` is false.
IqSegment apply_tdlc(const IqSegment& seg, const TdlcRealization& chan, bool renormalize = true);

/// Maximum Doppler shift in Hz for a speed and carrier.
double max_doppler_hz(double speed_kmh, double carrier_hz);

}  // namespace wavid
