// SPDX-License-Identifier: Apache-2.0
// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include <numeric>

#include "wavid/dataset.hpp"
#include "wavid/features.hpp"
#include "wavid/synth.hpp"
#include "wavid/ztree.hpp"

using namespace wavid;

namespace {

std::vector<IqSegment> segments(std::size_t n) {
  std::vector<IqSegment> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = kAllWaveforms[i % kClassCount];
    out.push_back(synth_segment(w, legal_modulations(w).front(), i));
  }
  return out;
}

DatasetSpec small_spec() {
  DatasetSpec s;
  s.snr_list_db = {10.0, 20.0};
  s.segments_per_class_per_snr = 20;
  s.channel = ChannelKind::tdlc;
  return s;
}

struct Node {
  std::vector<FeatureRow> rows;
  std::vector<std::uint16_t> labels;
  TrainedModel model;
  TrainingMatrix data;
  std::vector<std::uint32_t> samples;
};

const Node& node() {
  static const Node n = [] {
    Node x;
    const auto ds = generate_dataset(DatasetSpec::desk(ChannelKind::awgn, 1));
    for (const auto& r : ds.records) {
      x.rows.push_back(r.features);
      x.labels.push_back(r.label);
    }
    x.model = fit(x.rows, x.labels, TrainConfig{});
    x.data = TrainingMatrix::build(x.rows, x.labels, x.model.normalizer);
    x.samples.resize(x.rows.size());
    std::iota(x.samples.begin(), x.samples.end(), 0u);
    return x;
  }();
  return n;
}

void BM_ExtractBatch(benchmark::State& st) {
  const auto segs = segments(64);
  for (auto _ : st) benchmark::DoNotOptimize(extract_batch(segs));
  st.SetItemsProcessed(st.iterations() * 64);
}

void BM_ExtractBatchSerial(benchmark::State& st) {
  const auto segs = segments(64);
  for (auto _ : st) benchmark::DoNotOptimize(extract_batch_serial(segs));
  st.SetItemsProcessed(st.iterations() * 64);
}

void BM_GenerateDataset(benchmark::State& st) {
  const auto spec = small_spec();
  for (auto _ : st) benchmark::DoNotOptimize(generate_dataset(spec));
}

void BM_GenerateDatasetSerial(benchmark::State& st) {
  const auto spec = small_spec();
  for (auto _ : st) benchmark::DoNotOptimize(generate_dataset_serial(spec));
}

void BM_BestSplit(benchmark::State& st) {
  const auto& n = node();
  for (auto _ : st) benchmark::DoNotOptimize(best_split(n.data, n.samples, 0, TrainConfig{}, 7));
}

void BM_BestSplitSerial(benchmark::State& st) {
  const auto& n = node();
  for (auto _ : st) benchmark::DoNotOptimize(best_split_serial(n.data, n.samples, 0, TrainConfig{}, 7));
}

void BM_Predict(benchmark::State& st) {
  const auto& n = node();
  std::size_t i = 0;
  for (auto _ : st) {
    const auto& r = n.rows[i++ % n.rows.size()];
    benchmark::DoNotOptimize(predict(n.model.model, n.model.normalizer, std::span<const float, kFeatureCount>(r)));
  }
}

}  // namespace

BENCHMARK(BM_ExtractBatch)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_ExtractBatchSerial)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_GenerateDataset)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GenerateDatasetSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BestSplit)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BestSplitSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Predict);

BENCHMARK_MAIN();
