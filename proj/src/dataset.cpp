// SPDX-License-Identifier: Apache-2.0
#include "wavid/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

#include "byteio.hpp"
#include "wavid/features.hpp"
#include "wavid/rng.hpp"
#include "wavid/synth.hpp"

namespace wavid {

std::vector<double> DatasetSpec::default_snr_list() {
  std::vector<double> v;
  for (int s = 0; s <= 30; s += 2) v.push_back(s);
  return v;
}

DatasetSpec DatasetSpec::desk(ChannelKind channel, std::uint64_t seed) {
  DatasetSpec spec;
  spec.snr_list_db = {10.0, 20.0, 30.0};
  spec.segments_per_class_per_snr = 200;
  spec.channel = channel;
  spec.seed = seed;
  return spec;
}

void DatasetSpec::validate() const {
  if (snr_list_db.empty()) throw ConfigError("dataset: empty SNR list");
  for (double s : snr_list_db)
    if (!std::isfinite(s)) throw ConfigError("dataset: non-finite SNR in list");
  if (segments_per_class_per_snr < 1) throw ConfigError("dataset: segments per class per SNR must be >= 1");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("dataset: split ratio must lie in (0, 1)");
  if (!store_iq && !store_features) throw ConfigError("dataset: nothing to store (neither IQ nor features)");
  if (channel == ChannelKind::tdlc) {
    if (tdlc.speeds_kmh.empty() || tdlc.delay_spreads_ns.empty())
      throw ConfigError("dataset: TDL-C grid needs at least one speed and one delay spread");
    for (double v : tdlc.speeds_kmh)
      if (!(v >= 0.0)) throw ConfigError("dataset: TDL-C speed must be >= 0");
    for (double d : tdlc.delay_spreads_ns)
      if (!(d > 0.0)) throw ConfigError("dataset: TDL-C delay spread must be > 0");
  }
  const auto total = snr_list_db.size() * kClassCount * static_cast<std::size_t>(segments_per_class_per_snr);
  if (total > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("dataset: too many records");
}

namespace {

struct Cell {
  WaveformClass waveform;
  ModulationScheme modulation;
  double snr_db;
};

Cell cell_of(const DatasetSpec& spec, std::size_t index) {
  const auto per_class = static_cast<std::size_t>(spec.segments_per_class_per_snr);
  const std::size_t j = index % per_class;
  const std::size_t c = (index / per_class) % kClassCount;
  const std::size_t s = index / (per_class * kClassCount);
  const auto w = kAllWaveforms[c];
  const auto mods = legal_modulations(w);
  return {w, mods[j % mods.size()], spec.snr_list_db[s]};
}

Record make_record(const DatasetSpec& spec, std::size_t index) {
  const Cell cell = cell_of(spec, index);
  Record r;
  r.seed = spec.seed ^ static_cast<std::uint64_t>(index);
  r.label = static_cast<std::uint8_t>(cell.waveform);
  r.modulation = static_cast<std::uint8_t>(cell.modulation);
  r.snr_db = static_cast<float>(cell.snr_db);

  IqSegment seg = synth_segment(cell.waveform, cell.modulation, r.seed);
  if (spec.channel == ChannelKind::tdlc) {
    const auto draw = draw_tdlc_params(spec.tdlc, r.seed);
    ChannelSpec ch;
    ch.kind = ChannelKind::tdlc;
    ch.snr_db = cell.snr_db;
    ch.speed_kmh = draw.speed_kmh;
    ch.delay_spread_ns = draw.delay_spread_ns;
    ch.seed = r.seed;
    seg = apply_tdlc(seg, make_tdlc(ch, seg.samples.size()));
    r.speed_kmh = static_cast<float>(ch.speed_kmh);
    r.delay_spread_ns = static_cast<float>(ch.delay_spread_ns);
  }
  seg = apply_awgn(seg, cell.snr_db, r.seed);
  r.channel = spec.channel == ChannelKind::tdlc ? ChannelTag::tdlc : ChannelTag::awgn;

  // Quantize to the stored precision before extraction so that features
  // recomputed from a saved segment match the stored ones exactly.
  std::vector<float> iq(2 * seg.samples.size());
  for (std::size_t n = 0; n < seg.samples.size(); ++n) {
    iq[2 * n] = static_cast<float>(seg.samples[n].real());
    iq[2 * n + 1] = static_cast<float>(seg.samples[n].imag());
    seg.samples[n] = cplx(iq[2 * n], iq[2 * n + 1]);
  }
  if (spec.store_features) r.features = to_row(extract_features(seg.samples));
  if (spec.store_iq) r.iq = std::move(iq);
  return r;
}

}  // namespace

TdlcDraw draw_tdlc_params(const TdlcGrid& grid, std::uint64_t record_seed) {
  if (grid.speeds_kmh.empty() || grid.delay_spreads_ns.empty()) throw ConfigError("TDL-C grid is empty");
  Rng rng = make_rng(record_seed, Stream::channel_params);
  TdlcDraw d;
  d.speed_kmh = grid.speeds_kmh[static_cast<std::size_t>(rng() % grid.speeds_kmh.size())];
  d.delay_spread_ns = grid.delay_spreads_ns[static_cast<std::size_t>(rng() % grid.delay_spreads_ns.size())];
  return d;
}

namespace {

Dataset empty_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.flags = static_cast<std::uint8_t>((spec.store_iq ? Dataset::kHasIq : 0) |
                                       (spec.store_features ? Dataset::kHasFeatures : 0));
  ds.records.resize(spec.snr_list_db.size() * kClassCount *
                    static_cast<std::size_t>(spec.segments_per_class_per_snr));
  return ds;
}

}  // namespace

Dataset generate_dataset_serial(const DatasetSpec& spec) {
  Dataset ds = empty_dataset(spec);
  for (std::size_t i = 0; i < ds.records.size(); ++i) ds.records[i] = make_record(spec, i);
  return ds;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  Dataset ds = empty_dataset(spec);
  const auto n = static_cast<std::ptrdiff_t>(ds.records.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      ds.records[static_cast<std::size_t>(i)] = make_record(spec, static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(wavid_dataset_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return ds;
}

IqSegment record_segment(const Record& r) {
  if (r.iq.size() != 2 * kSegmentLength) throw InputError("record has no stored IQ samples");
  IqSegment seg;
  seg.samples.resize(kSegmentLength);
  for (std::size_t n = 0; n < kSegmentLength; ++n) seg.samples[n] = cplx(r.iq[2 * n], r.iq[2 * n + 1]);
  if (r.label >= kClassCount) throw InputError("record label out of range");
  seg.waveform = static_cast<WaveformClass>(r.label);
  seg.modulation = static_cast<ModulationScheme>(r.modulation);
  if (!std::isnan(r.snr_db)) seg.snr_db = r.snr_db;
  seg.channel = r.channel;
  seg.seed = r.seed;
  return seg;
}

// ---------------------------------------------------------------------------
// Container

namespace {

constexpr char kMagic[4] = {'W', 'V', 'D', 'S'};
constexpr std::size_t kRecordHeaderBytes = 1 + 1 + 4 + 1 + 4 + 4 + 8;

}  // namespace

std::vector<std::uint8_t> serialize_dataset(const Dataset& ds) {
  if ((ds.flags & ~(Dataset::kHasIq | Dataset::kHasFeatures)) != 0 || ds.flags == 0)
    throw FormatError("dataset flags must select IQ and/or features");
  if (ds.records.size() > std::numeric_limits<std::uint32_t>::max()) throw FormatError("too many records");
  detail::ByteWriter w;
  const std::size_t per = kRecordHeaderBytes + (ds.has_iq() ? 8 * kSegmentLength : 0) +
                          (ds.has_features() ? 4 * kFeatureCount : 0);
  w.reserve(11 + per * ds.records.size());
  w.bytes(kMagic, 4);
  w.le<std::uint16_t>(kDatasetFormatVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(ds.records.size()));
  w.le<std::uint8_t>(ds.flags);
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    w.le<std::uint8_t>(r.label);
    w.le<std::uint8_t>(r.modulation);
    w.f32(r.snr_db);
    w.le<std::uint8_t>(static_cast<std::uint8_t>(r.channel));
    w.f32(r.speed_kmh);
    w.f32(r.delay_spread_ns);
    w.le<std::uint64_t>(r.seed);
    if (ds.has_iq()) {
      if (r.iq.size() != 2 * kSegmentLength)
        throw FormatError("record " + std::to_string(i) + " is missing its IQ samples");
      for (float v : r.iq) w.f32(v);
    }
    if (ds.has_features())
      for (float v : r.features) w.f32(v);
  }
  return w.take();
}

Dataset deserialize_dataset(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("magic mismatch: not a WVDS dataset file");
  detail::ByteReader r(bytes, "dataset file");
  r.str(4, "magic");
  const auto version = r.le<std::uint16_t>("version");
  if (version != kDatasetFormatVersion)
    throw FormatError("dataset format version " + std::to_string(version) + " is not supported");
  const auto count = r.le<std::uint32_t>("record count");
  Dataset ds;
  ds.flags = r.le<std::uint8_t>("flags");
  if ((ds.flags & ~(Dataset::kHasIq | Dataset::kHasFeatures)) != 0 || ds.flags == 0)
    throw FormatError("dataset flags byte is invalid");
  const std::size_t per = kRecordHeaderBytes + (ds.has_iq() ? 8 * kSegmentLength : 0) +
                          (ds.has_features() ? 4 * kFeatureCount : 0);
  if (r.remaining() != per * count)
    throw FormatError("dataset file size does not match " + std::to_string(count) + " records");
  ds.records.resize(count);
  for (auto& rec : ds.records) {
    rec.label = r.le<std::uint8_t>("label");
    rec.modulation = r.le<std::uint8_t>("modulation");
    rec.snr_db = r.f32("snr");
    const auto tag = r.le<std::uint8_t>("channel tag");
    rec.speed_kmh = r.f32("speed");
    rec.delay_spread_ns = r.f32("delay spread");
    rec.seed = r.le<std::uint64_t>("seed");
    if (rec.label >= kClassCount) throw FormatError("record label out of range");
    if (rec.modulation >= kAllModulations.size()) throw FormatError("record modulation out of range");
    if (tag > static_cast<std::uint8_t>(ChannelTag::tdlc)) throw FormatError("record channel tag out of range");
    rec.channel = static_cast<ChannelTag>(tag);
    if (ds.has_iq()) {
      rec.iq.resize(2 * kSegmentLength);
      for (auto& v : rec.iq) v = r.f32("IQ");
    }
    if (ds.has_features())
      for (auto& v : rec.features) v = r.f32("features");
  }
  return ds;
}

void save_dataset(const std::string& path, const Dataset& ds) { detail::write_file(path, serialize_dataset(ds)); }

Dataset load_dataset(const std::string& path) {
  const auto bytes = detail::read_file(path);
  try {
    return deserialize_dataset(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Splitting

SplitIds stratified_split(const Dataset& ds, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  // Strata keyed by (label, snr bit pattern); map order keeps the result stable.
  std::map<std::pair<int, std::uint32_t>, std::vector<std::uint32_t>> strata;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    strata[{r.label, std::bit_cast<std::uint32_t>(r.snr_db)}].push_back(static_cast<std::uint32_t>(i));
  }
  SplitIds out;
  Rng rng = make_rng(seed, Stream::split);
  for (auto& [key, ids] : strata) {
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[static_cast<std::size_t>(rng() % i)]);
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(ids.size())));
    if (n_train == 0) {
      out.warnings.push_back("stratum (class " + std::to_string(key.first) + ", snr " +
                             std::to_string(std::bit_cast<float>(key.second)) + " dB) has " +
                             std::to_string(ids.size()) + " sample(s); none go to train");
    }
    out.train.insert(out.train.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.insert(out.test.end(), ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<FeatureRow> gather_rows(const Dataset& ds, std::span<const std::uint32_t> ids) {
  if (!ds.has_features()) throw InputError("dataset has no stored features");
  std::vector<FeatureRow> rows;
  rows.reserve(ids.size());
  for (auto i : ids) rows.push_back(ds.records.at(i).features);
  return rows;
}

std::vector<std::uint16_t> gather_labels(const Dataset& ds, std::span<const std::uint32_t> ids) {
  std::vector<std::uint16_t> labels;
  labels.reserve(ids.size());
  for (auto i : ids) labels.push_back(ds.records.at(i).label);
  return labels;
}

}  // namespace wavid
