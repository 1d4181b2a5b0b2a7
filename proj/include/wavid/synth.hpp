// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wavid/common.hpp"

namespace wavid {

/// One fixed parameterization per waveform class. Every value here shapes a
/// time-domain signature the feature extractor looks for (CP periodicity,
/// chirp slope, spreading period, envelope class, spectral occupancy).
struct WaveformParams {
  // OFDM: 32-point IFFT, CP 8, all subcarriers active.
  int ofdm_fft = 32;
  int ofdm_cp = 8;

  // OTFS / ODDM: M delay bins x N Doppler bins.
  int dd_delay_bins = 32;
  int dd_doppler_bins = 32;
  int dd_pilot_guard = 4;  // guard half-width in delay bins around the pilot
  double oddm_rolloff = 0.25;
  int oddm_span = 4;  // SRRC span in delay bins (total), 1 sample per bin

  // FBMC-OQAM with PHYDYAS prototype.
  int fbmc_subcarriers = 32;
  int fbmc_overlap = 4;

  // UFMC: subbands of equal width, Dolph-Chebyshev subband filters.
  int ufmc_fft = 32;
  int ufmc_subbands = 4;
  int ufmc_filter_len = 16;
  double ufmc_sidelobe_db = 40.0;

  // DSSS: chip rate equals sample rate.
  int dsss_code_len = 16;

  // LoRa chirp spread spectrum.
  int lora_sf = 7;  // 2^sf samples per chirp

  // NB-IoT: 12 of 256 subcarriers, CP 16.
  int nbiot_fft = 256;
  int nbiot_active = 12;
  int nbiot_cp = 16;
  int nbiot_symbols = 4;

  // GFSK / MFSK.
  int fsk_samples_per_symbol = 32;
  double gfsk_bt = 0.5;
  double gfsk_mod_index = 0.5;
};

inline constexpr WaveformParams kWaveformParams{};

/// Length-16 +/-1 spreading code: the 15-chip m-sequence of x^4 + x + 1
/// (Fibonacci LFSR, initial state 0001, bit 1 -> +1) with a trailing -1 chip.
inline constexpr std::array<int, 16> kDsssCode = {1,  -1, -1, -1, 1, 1,  1,  1,
                                                   -1, 1,  -1, 1,  1, -1, -1, -1};

/// Unit-average-energy constellation for a scheme, indexed by the symbol's
/// bit value (MSB first). Gray-coded for PSK and square QAM.
const std::vector<cplx>& constellation(ModulationScheme m);

/// Map bits (one bit per element, 0/1, MSB first per symbol) to symbols.
/// Throws InputError when the bit count is not a multiple of bits_per_symbol.
std::vector<cplx> map_symbols(std::span<const std::uint8_t> bits, ModulationScheme m);

/// Draw `count` random symbols of the given scheme from a seeded payload stream.
std::vector<cplx> random_symbols(std::size_t count, ModulationScheme m, std::uint64_t seed);

/// Deterministic clean, unit-power segment for a legal (waveform, modulation)
/// pair. Throws ConfigError for an illegal pairing.
IqSegment synth_segment(WaveformClass w, ModulationScheme m, std::uint64_t seed);

/// Scale in place to unit mean power; throws NumericError on a zero signal.
void normalize_power(std::vector<cplx>& x);

/// Dolph-Chebyshev window of length n with the given sidelobe attenuation (dB),
/// peak-normalized to 1.
std::vector<double> chebyshev_window(int n, double sidelobe_db);

/// PHYDYAS prototype filter for overlap factor K and M subcarriers, length K*M - 1.
std::vector<double> phydyas_prototype(int subcarriers, int overlap);

/// Square-root raised-cosine taps, `span` symbols at `sps` samples per symbol,
/// unit energy.
std::vector<double> srrc_taps(double rolloff, int span, int sps);

}  // namespace wavid
