// SPDX-License-Identifier: Apache-2.0
#include "wavid/common.hpp"

#include <algorithm>

namespace wavid {
namespace {

constexpr std::array<std::string_view, kClassCount> kWaveformNames = {
    "OFDM", "OTFS", "ODDM", "FBMC", "UFMC", "DSSS", "LoRa", "NBIoT", "GFSK", "MFSK"};
constexpr std::array<std::string_view, kModulationCount> kModulationNames = {
    "QPSK", "8PSK", "32QAM", "64APSK", "256QAM", "4096QAM"};

}  // namespace

std::string_view to_string(WaveformClass w) { return kWaveformNames.at(static_cast<std::size_t>(w)); }

std::string_view to_string(ModulationScheme m) {
  return kModulationNames.at(static_cast<std::size_t>(m));
}

std::string_view to_string(ChannelTag c) {
  switch (c) {
    case ChannelTag::none: return "none";
    case ChannelTag::awgn: return "awgn";
    case ChannelTag::tdlc: return "tdlc";
  }
  return "?";
}

std::optional<WaveformClass> waveform_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kWaveformNames.size(); ++i)
    if (kWaveformNames[i] == s) return static_cast<WaveformClass>(i);
  return std::nullopt;
}

std::optional<ModulationScheme> modulation_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kModulationNames.size(); ++i)
    if (kModulationNames[i] == s) return static_cast<ModulationScheme>(i);
  return std::nullopt;
}

int bits_per_symbol(ModulationScheme m) {
  switch (m) {
    case ModulationScheme::QPSK: return 2;
    case ModulationScheme::PSK8: return 3;
    case ModulationScheme::QAM32: return 5;
    case ModulationScheme::APSK64: return 6;
    case ModulationScheme::QAM256: return 8;
    case ModulationScheme::QAM4096: return 12;
  }
  throw InputError("unknown modulation scheme");
}

bool is_legal_pair(WaveformClass w, ModulationScheme m) {
  if (w == WaveformClass::GFSK || w == WaveformClass::MFSK)
    return m == ModulationScheme::QPSK || m == ModulationScheme::PSK8;
  return true;
}

std::vector<ModulationScheme> legal_modulations(WaveformClass w) {
  std::vector<ModulationScheme> out;
  std::copy_if(kAllModulations.begin(), kAllModulations.end(), std::back_inserter(out),
               [w](ModulationScheme m) { return is_legal_pair(w, m); });
  return out;
}

double mean_power(const std::vector<cplx>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  return acc / static_cast<double>(x.size());
}

}  // namespace wavid
