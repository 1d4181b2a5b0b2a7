// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wavid/common.hpp"
#include "wavid/features.hpp"

namespace wavid {

/// Model input precision: features enter the tree as single-precision values.
using FeatureRow = std::array<float, kFeatureCount>;

FeatureRow to_row(const FeatureVector& fv);

struct TreeNode {
  bool is_leaf = true;
  std::uint16_t feature = 0;
  float threshold = 0.0f;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint16_t label = 0;

  bool operator==(const TreeNode&) const = default;
};

/// Flat node array, root at index 0, children always after their parent.
/// Traversal rule: go left iff normalized value < threshold.
struct ZTreeModel {
  std::vector<TreeNode> nodes;
  std::uint16_t n_features = kFeatureCount;
  std::uint16_t class_count = kClassCount;
  std::vector<std::string> class_names;

  std::size_t internal_count() const;
  std::size_t leaf_count() const;
  /// Longest root-to-leaf path counted in edges (a single leaf has depth 0).
  std::size_t depth() const;
  /// Throws FormatError if the structural invariants do not hold.
  void validate() const;

  static ZTreeModel single_leaf(std::uint16_t label);
};

std::vector<std::string> default_class_names();

/// Per-feature z-score parameters, stored in model precision.
struct Normalizer {
  static constexpr float kStdFloor = 1e-8f;
  std::array<float, kFeatureCount> mean{};
  std::array<float, kFeatureCount> std{};

  static Normalizer identity();
  static Normalizer fit(std::span<const FeatureRow> rows);

  float apply(std::size_t feature, float value) const { return (value - mean[feature]) / std[feature]; }
  bool operator==(const Normalizer&) const = default;
};

enum class SplitCriterion : std::uint8_t { ztest, gini };

struct TrainConfig {
  int k_folds = 5;
  int repeats = 3;
  int n_min = 20;
  double tau_sig = 3.84;
  int max_thresholds = 256;
  SplitCriterion criterion = SplitCriterion::ztest;
  std::uint64_t seed = 1;
  /// Depth cap for the impurity (gini) tree only.
  int gini_max_depth = 20;
  /// Evaluate features of a node across OpenMP threads.
  bool parallel = true;

  void validate() const;
};

/// Pooled two-proportion Z^2 of a one-vs-rest split; equals the Pearson
/// chi-square of the 2x2 table [[kL, nL-kL], [kR, nR-kR]].
/// Throws InputError on invalid counts.
double z2_score(std::int64_t k_left, std::int64_t n_left, std::int64_t k_right, std::int64_t n_right);

inline constexpr double kZ2VarianceFloor = 1e-12;

/// Midpoints of adjacent distinct values of an ascending sequence; capped to
/// `max_thresholds` evenly index-spaced midpoints. Each threshold t between
/// neighbours a < b satisfies a < t <= b in float precision.
std::vector<float> candidate_thresholds(std::span<const float> sorted, std::size_t max_thresholds);

/// Column-major normalized training matrix.
struct TrainingMatrix {
  std::vector<std::vector<float>> columns;  // columns[f][sample]
  std::vector<std::uint16_t> labels;
  std::size_t size() const { return labels.size(); }

  static TrainingMatrix build(std::span<const FeatureRow> rows, std::span<const std::uint16_t> labels,
                              const Normalizer& norm);
};

struct Split {
  std::uint16_t feature = 0;
  float threshold = 0.0f;
  double score = 0.0;  // generalization Z^2 (ztest) or impurity decrease (gini)
};

/// Best Z^2 split of the samples at a node for the one-vs-rest problem of
/// `pos_class`, or nothing when no candidate clears n_min on both sides or the
/// best generalization score does not exceed tau_sig.
std::optional<Split> best_split(const TrainingMatrix& data, std::span<const std::uint32_t> samples,
                                std::uint16_t pos_class, const TrainConfig& cfg, std::uint64_t node_seed);
/// Single-threaded reference of best_split.
std::optional<Split> best_split_serial(const TrainingMatrix& data, std::span<const std::uint32_t> samples,
                                       std::uint16_t pos_class, const TrainConfig& cfg,
                                       std::uint64_t node_seed);

/// Largest multi-class Gini impurity decrease (> 0) with both children >= n_min.
std::optional<Split> best_gini_split(const TrainingMatrix& data, std::span<const std::uint32_t> samples,
                                     const TrainConfig& cfg);

struct TrainedModel {
  ZTreeModel model;
  Normalizer normalizer;
};

/// Fit the normalizer on `rows`, then grow the tree. Throws TrainingError on a
/// degenerate dataset (empty, mismatched sizes, invalid labels, non-finite values).
TrainedModel fit(std::span<const FeatureRow> rows, std::span<const std::uint16_t> labels,
                 const TrainConfig& cfg);

/// Iterative traversal; no allocation, no recursion.
std::uint16_t predict(const ZTreeModel& model, const Normalizer& norm, std::span<const float, kFeatureCount> x);
std::uint16_t predict(const ZTreeModel& model, const Normalizer& norm, const FeatureVector& fv);

/// Count of internal nodes splitting on each feature.
std::array<std::uint32_t, kFeatureCount> feature_importance(const ZTreeModel& model);

// Binary container, little-endian: magic "ZTRE", version, header, node records,
// normalizer, class-name table. See docs/model_format.md.
inline constexpr std::uint16_t kModelFormatVersion = 1;
inline constexpr std::size_t kNodeRecordBytes = 17;

std::vector<std::uint8_t> serialize(const ZTreeModel& model, const Normalizer& norm);
TrainedModel deserialize(std::span<const std::uint8_t> bytes);

void save_model(const std::string& path, const ZTreeModel& model, const Normalizer& norm);
TrainedModel load_model(const std::string& path);

}  // namespace wavid
