// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wavid/common.hpp"
#include "wavid/dataset.hpp"
#include "wavid/ztree.hpp"

namespace wavid {

using Confusion = std::array<std::array<std::uint64_t, kClassCount>, kClassCount>;  // [true][pred]

struct SnrBreakdown {
  float snr_db = 0.0f;
  std::uint64_t count = 0;
  double accuracy = 0.0;
};

struct PairRate {
  float snr_db = 0.0f;
  double a_to_b = 0.0;
  double b_to_a = 0.0;
};

struct PairSeries {
  std::uint16_t class_a = 0;
  std::uint16_t class_b = 0;
  std::vector<PairRate> rates;
};

struct EvalReport {
  Confusion confusion{};
  std::array<double, kClassCount> precision{}, recall{}, f1{};
  // Set when a class has no predictions (precision) or no true samples (recall);
  // the corresponding metric is reported as 0.
  std::array<bool, kClassCount> precision_undefined{}, recall_undefined{};
  // Unweighted means over the classes that occur in the truth or the predictions.
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double accuracy = 0.0;
  std::uint64_t total = 0;
  std::vector<SnrBreakdown> per_snr;
  std::vector<PairSeries> pairs;
};

/// Metrics from parallel arrays of true labels, predictions and per-sample SNR
/// (NaN SNRs are skipped in the per-SNR breakdown). Throws InputError on size
/// mismatch or out-of-range labels.
EvalReport evaluate_predictions(std::span<const std::uint16_t> truth, std::span<const std::uint16_t> pred,
                                std::span<const float> snr_db);

/// Per-SNR misclassification rates a->b and b->a.
PairSeries confusion_pair_series(std::span<const std::uint16_t> truth, std::span<const std::uint16_t> pred,
                                 std::span<const float> snr_db, std::uint16_t class_a, std::uint16_t class_b);

/// Predict every record in `ids` from stored features and evaluate.
EvalReport evaluate(const ZTreeModel& model, const Normalizer& norm, const Dataset& ds,
                    std::span<const std::uint32_t> ids);
PairSeries confusion_vs_snr(const ZTreeModel& model, const Normalizer& norm, const Dataset& ds,
                            std::span<const std::uint32_t> ids, std::uint16_t class_a, std::uint16_t class_b);

struct ConfusionPair {
  std::uint16_t a = 0, b = 0;  // a < b
  std::uint64_t count = 0;     // confusion[a][b] + confusion[b][a]
};
/// Unordered off-diagonal pairs sorted by combined count, descending (ties by (a, b)).
std::vector<ConfusionPair> ranked_confusion_pairs(const Confusion& c);

std::string report_json(const EvalReport& r, std::span<const std::string> class_names);
std::string report_table(const EvalReport& r, std::span<const std::string> class_names);

}  // namespace wavid
