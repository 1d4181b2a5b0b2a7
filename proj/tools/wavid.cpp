// SPDX-License-Identifier: Apache-2.0
// wavid: generate datasets, train/evaluate ZTree models, benchmark and export.

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "wavid/dataset.hpp"
#include "wavid/export.hpp"
#include "wavid/features.hpp"
#include "wavid/latency.hpp"
#include "wavid/metrics.hpp"
#include "wavid/ztree.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wavid;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct Globals {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int threads = 0;
};

fs::path out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw FormatError("write failed: " + path.string());
}

// Echo every option of the subcommand, given or defaulted, plus versions.
void write_manifest(const Globals& g, const CLI::App& sub, const json& extra) {
  json flags = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name(false, true);
    if (opt == sub.get_help_ptr() || name.empty()) continue;
    if (opt->get_expected_max() == 0) {
      flags[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      flags[name] = r.size() == 1 ? json(r[0]) : json(r);
    } else {
      flags[name] = opt->get_default_str();
    }
  }
  json m;
  m["tool"] = "wavid";
  m["tool_version"] = kToolVersion;
  m["command"] = sub.get_name();
  m["seed"] = g.seed;
  m["out_dir"] = g.out_dir;
  m["threads"] = g.threads;
  m["flags"] = flags;
  m["model_format_version"] = kModelFormatVersion;
  m["dataset_format_version"] = kDatasetFormatVersion;
  m["outputs"] = extra;
  write_text(out_path(g, sub.get_name() + "_manifest.json"), m.dump(2) + "\n");
}

std::vector<float> read_f32_file(const std::string& path, std::size_t multiple, const char* what) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + std::string(what) + " file " + path);
  std::vector<char> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (raw.empty() || raw.size() % (4 * multiple) != 0)
    throw FormatError(path + ": size must be a positive multiple of " + std::to_string(multiple) + " float32 values");
  std::vector<float> out(raw.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[4 * i + b])) << (8 * b);
    out[i] = std::bit_cast<float>(u);
  }
  return out;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> v;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string("cannot parse ") + what + " list entry '" + item + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return v;
}

WaveformClass parse_class(const std::string& s) {
  const auto w = waveform_from_string(s);
  if (!w) throw ConfigError("unknown waveform class '" + s + "'");
  return *w;
}

std::pair<std::uint16_t, std::uint16_t> split_names(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("--pair expects two classes separated by a comma");
  const auto a = static_cast<std::uint16_t>(parse_class(text.substr(0, comma)));
  const auto b = static_cast<std::uint16_t>(parse_class(text.substr(comma + 1)));
  if (a == b) throw ConfigError("--pair needs two different classes");
  return {a, b};
}

const char* error_kind(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const InputError*>(&e)) return "input";
  if (dynamic_cast<const FormatError*>(&e)) return "format";
  if (dynamic_cast<const TrainingError*>(&e)) return "training";
  if (dynamic_cast<const NumericError*>(&e)) return "numeric";
  return "error";
}

std::vector<std::uint32_t> subset_ids(const Dataset& ds, const std::string& subset, double ratio,
                                      std::uint64_t seed) {
  if (subset == "all") {
    std::vector<std::uint32_t> ids(ds.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);
    return ids;
  }
  auto split = stratified_split(ds, ratio, seed);
  for (const auto& w : split.warnings) std::cerr << "warning: " << w << "\n";
  return subset == "train" ? split.train : split.test;
}

std::string importance_table(const ZTreeModel& model) {
  const auto counts = feature_importance(model);
  std::string out = "feature importance (internal nodes per feature)\n";
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (counts[f] == 0) continue;
    char line[96];
    std::snprintf(line, sizeof line, "  %2zu  %-12s %u\n", f, std::string(feature_name(f)).c_str(), counts[f]);
    out += line;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Waveform identification toolkit: synthetic datasets, ZTree training, evaluation and export"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for all outputs")->capture_default_str();
  app.add_option("--threads", g.threads, "OpenMP threads (0 = available parallelism)")->check(CLI::NonNegativeNumber);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a dataset");
  std::string channel = "awgn", snr_text = "10,20,30", speeds_text = "30,90,150,210", delays_text = "300,600";
  std::string dataset_name = "dataset.wvds";
  int per_class = 200;
  bool full_grid = false, no_iq = false, no_features = false;
  synth->add_option("--channel", channel, "awgn or tdlc")->check(CLI::IsMember({"awgn", "tdlc"}))->capture_default_str();
  synth->add_option("--snr", snr_text, "Comma-separated SNRs in dB")->capture_default_str();
  synth->add_option("--per-class", per_class, "Segments per class per SNR")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_flag("--full-grid", full_grid, "0..30 dB in 2 dB steps, 960 segments per class per SNR");
  synth->add_option("--speeds", speeds_text, "TDL-C speeds, km/h")->capture_default_str();
  synth->add_option("--delay-spreads", delays_text, "TDL-C delay spreads, ns")->capture_default_str();
  synth->add_option("--name", dataset_name, "Output file name")->capture_default_str();
  synth->add_flag("--no-iq", no_iq, "Store features only");
  synth->add_flag("--no-features", no_features, "Store raw IQ only");

  // train
  auto* train = app.add_subcommand("train", "Train a ZTree on a dataset's training split");
  std::string dataset_path, criterion = "ztest", model_name = "model.ztree";
  double split_ratio = 0.8;
  TrainConfig tc;
  train->add_option("--dataset", dataset_path, "Dataset file")->required()->check(CLI::ExistingFile);
  train->add_option("--split-ratio", split_ratio, "Train fraction per stratum")->capture_default_str();
  train->add_option("--k-folds", tc.k_folds)->capture_default_str();
  train->add_option("--repeats", tc.repeats)->capture_default_str();
  train->add_option("--n-min", tc.n_min)->capture_default_str();
  train->add_option("--tau", tc.tau_sig, "Z^2 significance threshold")->capture_default_str();
  train->add_option("--max-thresholds", tc.max_thresholds)->capture_default_str();
  train->add_option("--criterion", criterion)->check(CLI::IsMember({"ztest", "gini"}))->capture_default_str();
  train->add_option("--name", model_name, "Output model file name")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a model on a dataset split");
  std::string model_path, subset = "test", pair_text = "OTFS,LoRa";
  eval->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  eval->add_option("--dataset", dataset_path, "Dataset file")->required()->check(CLI::ExistingFile);
  eval->add_option("--split-ratio", split_ratio)->capture_default_str();
  eval->add_option("--subset", subset)->check(CLI::IsMember({"train", "test", "all"}))->capture_default_str();
  eval->add_option("--pair", pair_text, "Two classes for the confusion-rate series")->capture_default_str();

  // predict
  auto* pred = app.add_subcommand("predict", "Print one class per input vector or segment");
  std::string iq_file, features_file;
  bool codes = false;
  pred->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  auto* iq_opt = pred->add_option("--iq-file", iq_file, "Raw LE float32 interleaved I/Q, 1024 samples per segment");
  auto* feat_opt = pred->add_option("--features-file", features_file, "Raw LE float32, 80 values per vector");
  iq_opt->excludes(feat_opt);
  pred->add_flag("--codes", codes, "Print class codes instead of names");

  // bench
  auto* bench = app.add_subcommand("bench", "Latency of tree walk and extraction + walk");
  std::uint64_t reps = 100000;
  bench->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  bench->add_option("--dataset", dataset_path)->required()->check(CLI::ExistingFile);
  bench->add_option("--reps", reps, "Repetitions per measurement")->capture_default_str();

  // export
  auto* exp = app.add_subcommand("export", "Emit the model as a C99 header plus test vectors");
  std::string format = "c99";
  std::size_t n_vectors = 10000;
  exp->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  exp->add_option("--format", format)->check(CLI::IsMember({"c99"}))->capture_default_str();
  exp->add_option("--dataset", dataset_path, "Dataset whose features seed the test vectors")->check(CLI::ExistingFile);
  exp->add_option("--vectors", n_vectors, "Number of test vectors")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    if (g.threads > 0) omp_set_num_threads(g.threads);

    if (synth->parsed()) {
      DatasetSpec spec;
      spec.seed = g.seed;
      spec.channel = channel == "tdlc" ? ChannelKind::tdlc : ChannelKind::awgn;
      spec.snr_list_db = full_grid ? DatasetSpec::default_snr_list() : parse_list(snr_text, "SNR");
      spec.segments_per_class_per_snr = full_grid ? 960 : per_class;
      spec.tdlc.speeds_kmh = parse_list(speeds_text, "speed");
      spec.tdlc.delay_spreads_ns = parse_list(delays_text, "delay spread");
      spec.store_iq = !no_iq;
      spec.store_features = !no_features;
      const auto ds = generate_dataset(spec);
      const auto path = out_path(g, dataset_name);
      save_dataset(path.string(), ds);
      std::cout << "wrote " << ds.size() << " records to " << path.string() << "\n";
      write_manifest(g, *synth, {{"dataset", path.string()}, {"records", ds.size()}});

    } else if (train->parsed()) {
      tc.seed = g.seed;
      tc.criterion = criterion == "gini" ? SplitCriterion::gini : SplitCriterion::ztest;
      tc.validate();
      const auto ds = load_dataset(dataset_path);
      const auto split = stratified_split(ds, split_ratio, g.seed);
      for (const auto& w : split.warnings) std::cerr << "warning: " << w << "\n";
      const auto rows = gather_rows(ds, split.train);
      const auto labels = gather_labels(ds, split.train);
      const auto tm = fit(rows, labels, tc);
      const auto path = out_path(g, model_name);
      save_model(path.string(), tm.model, tm.normalizer);
      const auto bytes = serialize(tm.model, tm.normalizer).size();

      std::string log;
      log += "training samples " + std::to_string(rows.size()) + "\n";
      log += "nodes " + std::to_string(tm.model.nodes.size()) + " (internal " +
             std::to_string(tm.model.internal_count()) + ", leaves " + std::to_string(tm.model.leaf_count()) + ")\n";
      log += "depth " + std::to_string(tm.model.depth()) + "\n";
      log += "serialized bytes " + std::to_string(bytes) + "\n";
      log += "emitted C99 static bytes " + std::to_string(emitted_footprint_bytes(tm.model)) + "\n";
      log += importance_table(tm.model);
      write_text(out_path(g, "train_log.txt"), log);
      std::cout << log;
      write_manifest(g, *train,
                     {{"model", path.string()},
                      {"nodes", tm.model.nodes.size()},
                      {"depth", tm.model.depth()},
                      {"serialized_bytes", bytes}});

    } else if (eval->parsed()) {
      const auto pair = split_names(pair_text);
      const auto tm = load_model(model_path);
      const auto ds = load_dataset(dataset_path);
      const auto ids = subset_ids(ds, subset, split_ratio, g.seed);
      auto report = evaluate(tm.model, tm.normalizer, ds, ids);
      report.pairs.push_back(confusion_vs_snr(tm.model, tm.normalizer, ds, ids, pair.first, pair.second));
      const auto json_path = out_path(g, "report.json");
      const auto text_path = out_path(g, "report.txt");
      write_text(json_path, report_json(report, tm.model.class_names) + "\n");
      const auto table = report_table(report, tm.model.class_names);
      write_text(text_path, table);
      std::cout << table;
      write_manifest(g, *eval,
                     {{"report_json", json_path.string()}, {"report_text", text_path.string()},
                      {"accuracy", report.accuracy}});

    } else if (pred->parsed()) {
      if (iq_file.empty() && features_file.empty()) throw ConfigError("predict needs --iq-file or --features-file");
      const auto tm = load_model(model_path);
      std::vector<FeatureRow> rows;
      if (!features_file.empty()) {
        const auto v = read_f32_file(features_file, kFeatureCount, "features");
        rows.resize(v.size() / kFeatureCount);
        for (std::size_t i = 0; i < rows.size(); ++i)
          std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(i * kFeatureCount), kFeatureCount, rows[i].begin());
      } else {
        const auto v = read_f32_file(iq_file, 2 * kSegmentLength, "IQ");
        std::vector<cplx> seg(kSegmentLength);
        for (std::size_t s = 0; s < v.size() / (2 * kSegmentLength); ++s) {
          const float* p = v.data() + s * 2 * kSegmentLength;
          for (std::size_t n = 0; n < kSegmentLength; ++n) seg[n] = cplx(p[2 * n], p[2 * n + 1]);
          rows.push_back(to_row(extract_features(seg)));
        }
      }
      for (const auto& r : rows) {
        const auto label = predict(tm.model, tm.normalizer, std::span<const float, kFeatureCount>(r));
        if (codes || label >= tm.model.class_names.size())
          std::cout << label << "\n";
        else
          std::cout << tm.model.class_names[label] << "\n";
      }

    } else if (bench->parsed()) {
      const auto tm = load_model(model_path);
      const auto ds = load_dataset(dataset_path);
      if (!ds.has_iq() || !ds.has_features()) throw InputError("bench needs a dataset with both IQ and features");
      std::vector<std::uint32_t> ids(ds.size());
      for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);
      const auto rows = gather_rows(ds, ids);
      std::vector<IqSegment> segs;
      segs.reserve(ds.size());
      for (const auto& r : ds.records) segs.push_back(record_segment(r));
      const auto walk = time_walk(tm.model, tm.normalizer, rows, reps);
      const auto full = time_extract_and_walk(tm.model, tm.normalizer, segs, reps);
      auto stats = [](const LatencyStats& s) {
        return json{{"median_us", s.median_us}, {"p99_us", s.p99_us}, {"mean_us", s.mean_us}, {"operations", s.operations}};
      };
      const json report = {{"walk", stats(walk)}, {"extract_and_walk", stats(full)}, {"nodes", tm.model.nodes.size()}};
      const auto path = out_path(g, "latency.json");
      write_text(path, report.dump(2) + "\n");
      std::printf("tree walk        median %.4f us  p99 %.4f us  (%llu calls)\n", walk.median_us, walk.p99_us,
                  static_cast<unsigned long long>(walk.operations));
      std::printf("extract + walk   median %.2f us  p99 %.2f us  (%llu calls)\n", full.median_us, full.p99_us,
                  static_cast<unsigned long long>(full.operations));
      write_manifest(g, *bench, {{"latency", path.string()}});

    } else if (exp->parsed()) {
      const auto tm = load_model(model_path);
      std::vector<FeatureRow> base;
      if (!dataset_path.empty()) {
        const auto ds = load_dataset(dataset_path);
        std::vector<std::uint32_t> ids(ds.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);
        base = gather_rows(ds, ids);
      }
      const auto header = out_path(g, "wavid_model.h");
      write_text(header, emit_c99_header(tm.model, tm.normalizer));
      const auto tv = make_test_vectors(tm.model, tm.normalizer, base, n_vectors, g.seed);
      const auto vpath = out_path(g, "vectors.f32");
      const auto lpath = out_path(g, "labels.f32");
      write_test_vectors(tv, vpath.string(), lpath.string());
      std::cout << "wrote " << header.string() << " and " << tv.rows.size() << " test vectors ("
                << tv.threshold_adjacent << " threshold-adjacent)\n";
      write_manifest(g, *exp,
                     {{"header", header.string()}, {"vectors", vpath.string()}, {"labels", lpath.string()},
                      {"count", tv.rows.size()}, {"threshold_adjacent", tv.threshold_adjacent}});
    }
  } catch (const Error& e) {
    std::cerr << json{{"error", error_kind(e)}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
