// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wavid {

using cplx = std::complex<double>;

/// Samples per observation window.
inline constexpr std::size_t kSegmentLength = 1024;
/// Length of the canonical feature vector.
inline constexpr std::size_t kFeatureCount = 80;
inline constexpr std::size_t kClassCount = 10;

// Error hierarchy. Every error raised by the library derives from wavid::Error
// so callers can catch one type; the subclasses name the failure category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class InputError : public Error {
 public:
  using Error::Error;
};
class NumericError : public Error {
 public:
  using Error::Error;
};
class FormatError : public Error {
 public:
  using Error::Error;
};
class TrainingError : public Error {
 public:
  using Error::Error;
};

enum class WaveformClass : std::uint8_t {
  OFDM = 0,
  OTFS = 1,
  ODDM = 2,
  FBMC = 3,
  UFMC = 4,
  DSSS = 5,
  LoRa = 6,
  NBIoT = 7,
  GFSK = 8,
  MFSK = 9,
};

enum class ModulationScheme : std::uint8_t {
  QPSK = 0,
  PSK8 = 1,
  QAM32 = 2,
  APSK64 = 3,
  QAM256 = 4,
  QAM4096 = 5,
};

inline constexpr std::size_t kModulationCount = 6;

enum class ChannelTag : std::uint8_t { none = 0, awgn = 1, tdlc = 2 };

inline constexpr std::array<WaveformClass, kClassCount> kAllWaveforms = {
    WaveformClass::OFDM, WaveformClass::OTFS, WaveformClass::ODDM, WaveformClass::FBMC,
    WaveformClass::UFMC, WaveformClass::DSSS, WaveformClass::LoRa, WaveformClass::NBIoT,
    WaveformClass::GFSK, WaveformClass::MFSK};

inline constexpr std::array<ModulationScheme, kModulationCount> kAllModulations = {
    ModulationScheme::QPSK,   ModulationScheme::PSK8,   ModulationScheme::QAM32,
    ModulationScheme::APSK64, ModulationScheme::QAM256, ModulationScheme::QAM4096};

std::string_view to_string(WaveformClass w);
std::string_view to_string(ModulationScheme m);
std::string_view to_string(ChannelTag c);

std::optional<WaveformClass> waveform_from_string(std::string_view s);
std::optional<ModulationScheme> modulation_from_string(std::string_view s);

/// Bits carried per constellation symbol: 2, 3, 5, 6, 8, 12.
int bits_per_symbol(ModulationScheme m);

/// GFSK and MFSK only accept the QPSK / PSK8 alphabets (4-ary / 8-ary).
bool is_legal_pair(WaveformClass w, ModulationScheme m);
std::vector<ModulationScheme> legal_modulations(WaveformClass w);

struct IqSegment {
  std::vector<cplx> samples;
  WaveformClass waveform = WaveformClass::OFDM;
  ModulationScheme modulation = ModulationScheme::QPSK;
  std::optional<double> snr_db;  // empty means clean
  ChannelTag channel = ChannelTag::none;
  std::uint64_t seed = 0;
};

double mean_power(const std::vector<cplx>& x);

}  // namespace wavid
