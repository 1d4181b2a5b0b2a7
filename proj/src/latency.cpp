// SPDX-License-Identifier: Apache-2.0
#include "wavid/latency.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <vector>

#include "wavid/features.hpp"

namespace wavid {

namespace {

using Clock = std::chrono::steady_clock;

LatencyStats summarize(std::vector<double>& samples_us, std::uint64_t operations) {
  std::sort(samples_us.begin(), samples_us.end());
  LatencyStats s;
  const std::size_t n = samples_us.size();
  s.median_us = n % 2 ? samples_us[n / 2] : 0.5 * (samples_us[n / 2 - 1] + samples_us[n / 2]);
  s.p99_us = samples_us[std::min(n - 1, static_cast<std::size_t>(0.99 * static_cast<double>(n)))];
  s.mean_us = std::accumulate(samples_us.begin(), samples_us.end(), 0.0) / static_cast<double>(n);
  s.operations = operations;
  return s;
}

double elapsed_us(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::micro>(b - a).count();
}

}  // namespace

LatencyStats time_walk(const ZTreeModel& model, const Normalizer& norm, std::span<const FeatureRow> rows,
                       std::uint64_t repetitions) {
  if (repetitions == 0) throw InputError("latency: repetitions must be >= 1");
  if (rows.empty()) throw InputError("latency: no feature vectors to time");
  const std::uint64_t batches = (repetitions + kWalkBatch - 1) / kWalkBatch;
  std::vector<double> per_call(batches);
  std::size_t next = 0;
  volatile std::uint32_t sink = 0;
  // Warm the cache with one untimed pass.
  for (const auto& r : rows) sink = sink + predict(model, norm, std::span<const float, kFeatureCount>(r));
  for (std::uint64_t b = 0; b < batches; ++b) {
    std::uint32_t acc = 0;
    const auto t0 = Clock::now();
    for (std::uint64_t k = 0; k < kWalkBatch; ++k) {
      acc += predict(model, norm, std::span<const float, kFeatureCount>(rows[next]));
      next = next + 1 == rows.size() ? 0 : next + 1;
    }
    const auto t1 = Clock::now();
    sink = sink + acc;
    per_call[b] = elapsed_us(t0, t1) / static_cast<double>(kWalkBatch);
  }
  return summarize(per_call, batches * kWalkBatch);
}

LatencyStats time_extract_and_walk(const ZTreeModel& model, const Normalizer& norm,
                                   std::span<const IqSegment> segments, std::uint64_t repetitions) {
  if (repetitions == 0) throw InputError("latency: repetitions must be >= 1");
  if (segments.empty()) throw InputError("latency: no segments to time");
  for (const auto& s : segments)
    if (s.samples.size() != kSegmentLength) throw InputError("latency: segments must have 1024 samples");
  std::vector<double> samples(repetitions);
  volatile std::uint32_t sink = predict(model, norm, extract_features(segments[0].samples));
  for (std::uint64_t i = 0; i < repetitions; ++i) {
    const auto& seg = segments[i % segments.size()];
    const auto t0 = Clock::now();
    const auto label = predict(model, norm, extract_features(seg.samples));
    const auto t1 = Clock::now();
    sink = sink + label;
    samples[i] = elapsed_us(t0, t1);
  }
  return summarize(samples, repetitions);
}

}  // namespace wavid
