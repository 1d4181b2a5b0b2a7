// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "wavid/common.hpp"
#include "wavid/ztree.hpp"

namespace wavid {

struct LatencyStats {
  double median_us = 0.0;
  double p99_us = 0.0;
  double mean_us = 0.0;
  std::uint64_t operations = 0;
};

struct LatencyReport {
  LatencyStats walk;                // tree traversal on a ready feature vector
  LatencyStats extract_and_walk;    // raw IQ to class label
};

/// Tree-walk timing. Calls are timed in batches of `kWalkBatch` so the clock
/// resolution does not dominate; statistics are over per-call batch means.
/// Cycles through `rows`. Throws InputError if repetitions is 0 or rows is empty.
inline constexpr std::uint64_t kWalkBatch = 64;
LatencyStats time_walk(const ZTreeModel& model, const Normalizer& norm, std::span<const FeatureRow> rows,
                       std::uint64_t repetitions);

/// Extraction + walk timing, one timed call per repetition, cycling through `segments`.
LatencyStats time_extract_and_walk(const ZTreeModel& model, const Normalizer& norm,
                                   std::span<const IqSegment> segments, std::uint64_t repetitions);

}  // namespace wavid
