// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wavid/channel.hpp"
#include "wavid/common.hpp"
#include "wavid/ztree.hpp"

namespace wavid {

/// Mobility/dispersion grid of the multipath channel; each record draws one
/// speed and one delay spread uniformly and independently.
struct TdlcGrid {
  std::vector<double> speeds_kmh = {30.0, 90.0, 150.0, 210.0};
  std::vector<double> delay_spreads_ns = {300.0, 600.0};
};

struct DatasetSpec {
  std::vector<double> snr_list_db = default_snr_list();
  int segments_per_class_per_snr = 200;
  ChannelKind channel = ChannelKind::awgn;
  TdlcGrid tdlc;
  double split_ratio = 0.8;
  std::uint64_t seed = 1;
  bool store_iq = true;
  bool store_features = true;

  void validate() const;

  /// 0..30 dB in 2 dB steps.
  static std::vector<double> default_snr_list();
  /// {10, 20, 30} dB x 200 segments per class.
  static DatasetSpec desk(ChannelKind channel, std::uint64_t seed = 1);
};

struct Record {
  std::uint8_t label = 0;
  std::uint8_t modulation = 0;
  float snr_db = 0.0f;  // NaN for a clean segment
  ChannelTag channel = ChannelTag::none;
  float speed_kmh = 0.0f;
  float delay_spread_ns = 0.0f;
  std::uint64_t seed = 0;
  std::vector<float> iq;  // interleaved I/Q, 2 x 1024, empty when not stored
  FeatureRow features{};

  bool operator==(const Record&) const = default;
};

struct Dataset {
  static constexpr std::uint8_t kHasIq = 1;
  static constexpr std::uint8_t kHasFeatures = 2;

  std::uint8_t flags = kHasIq | kHasFeatures;
  std::vector<Record> records;

  bool has_iq() const { return (flags & kHasIq) != 0; }
  bool has_features() const { return (flags & kHasFeatures) != 0; }
  std::size_t size() const { return records.size(); }
};

/// Record order: SNR-major, then class, then segment; modulations rotate over
/// the class's legal set. Record i uses seed spec.seed ^ i, so the parallel and
/// serial generators write identical bytes.
Dataset generate_dataset(const DatasetSpec& spec);
Dataset generate_dataset_serial(const DatasetSpec& spec);

struct TdlcDraw {
  double speed_kmh = 0.0;
  double delay_spread_ns = 0.0;
};
/// Channel parameters of the record with seed `record_seed`, drawn uniformly
/// and independently from the grid.
TdlcDraw draw_tdlc_params(const TdlcGrid& grid, std::uint64_t record_seed);

/// Rebuild the stored (single-precision) segment of a record with raw IQ.
IqSegment record_segment(const Record& r);

inline constexpr std::uint16_t kDatasetFormatVersion = 1;

std::vector<std::uint8_t> serialize_dataset(const Dataset& ds);
Dataset deserialize_dataset(std::span<const std::uint8_t> bytes);
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

struct SplitIds {
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> test;
  std::vector<std::string> warnings;
};

/// Per (class, SNR) stratum: shuffle, send floor(ratio * n) to train and the
/// rest to test. A stratum that contributes nothing to train yields a warning.
SplitIds stratified_split(const Dataset& ds, double ratio, std::uint64_t seed);

/// Feature rows and labels of a subset, in id order.
std::vector<FeatureRow> gather_rows(const Dataset& ds, std::span<const std::uint32_t> ids);
std::vector<std::uint16_t> gather_labels(const Dataset& ds, std::span<const std::uint32_t> ids);

}  // namespace wavid
