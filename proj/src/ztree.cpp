// SPDX-License-Identifier: Apache-2.0
#include "wavid/ztree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wavid/rng.hpp"

namespace wavid {

FeatureRow to_row(const FeatureVector& fv) {
  FeatureRow row{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) row[i] = static_cast<float>(fv[i]);
  return row;
}

std::vector<std::string> default_class_names() {
  std::vector<std::string> names;
  for (auto w : kAllWaveforms) names.emplace_back(to_string(w));
  return names;
}

// ---------------------------------------------------------------------------
// Model structure

std::size_t ZTreeModel::internal_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf; }));
}

std::size_t ZTreeModel::leaf_count() const { return nodes.size() - internal_count(); }

std::size_t ZTreeModel::depth() const {
  if (nodes.empty()) return 0;
  // Children follow parents, so one reverse sweep settles every subtree height.
  std::vector<std::size_t> h(nodes.size(), 0);
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const auto& n = nodes[i];
    if (!n.is_leaf) h[i] = 1 + std::max(h[n.left], h[n.right]);
  }
  return h[0];
}

void ZTreeModel::validate() const {
  if (nodes.empty()) throw FormatError("model has no nodes");
  if (n_features != kFeatureCount) throw FormatError("model feature count must be 80");
  if (class_count == 0) throw FormatError("model has zero classes");
  if (!class_names.empty() && class_names.size() != class_count)
    throw FormatError("class-name table size does not match class count");
  std::vector<int> parents(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.is_leaf) {
      if (n.label >= class_count)
        throw FormatError("leaf " + std::to_string(i) + " has label " + std::to_string(n.label) +
                          " outside the class table");
      continue;
    }
    if (n.feature >= n_features) throw FormatError("node " + std::to_string(i) + " splits on invalid feature");
    if (!std::isfinite(n.threshold)) throw FormatError("node " + std::to_string(i) + " has a non-finite threshold");
    if (n.left <= i || n.right <= i || n.left >= nodes.size() || n.right >= nodes.size() || n.left == n.right)
      throw FormatError("node " + std::to_string(i) + " has invalid child indices");
    ++parents[n.left];
    ++parents[n.right];
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (parents[i] != 1) throw FormatError("node " + std::to_string(i) + " is not reachable exactly once");
  }
}

ZTreeModel ZTreeModel::single_leaf(std::uint16_t label) {
  ZTreeModel m;
  m.class_names = default_class_names();
  TreeNode leaf;
  leaf.label = label;
  m.nodes.push_back(leaf);
  return m;
}

// ---------------------------------------------------------------------------
// Normalization

Normalizer Normalizer::identity() {
  Normalizer n;
  n.mean.fill(0.0f);
  n.std.fill(1.0f);
  return n;
}

Normalizer Normalizer::fit(std::span<const FeatureRow> rows) {
  if (rows.empty()) throw TrainingError("normalizer: no training rows");
  Normalizer n;
  const double count = static_cast<double>(rows.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double s = 0.0;
    for (const auto& r : rows) s += r[f];
    const double mean = s / count;
    double v = 0.0;
    for (const auto& r : rows) v += (r[f] - mean) * (r[f] - mean);
    n.mean[f] = static_cast<float>(mean);
    n.std[f] = std::max(static_cast<float>(std::sqrt(v / count)), kStdFloor);
  }
  return n;
}

void TrainConfig::validate() const {
  if (k_folds < 2) throw ConfigError("train: k_folds must be >= 2");
  if (repeats < 1) throw ConfigError("train: repeats must be >= 1");
  if (n_min < 1) throw ConfigError("train: n_min must be >= 1");
  if (!(tau_sig > 0.0)) throw ConfigError("train: tau_sig must be > 0");
  if (max_thresholds < 1) throw ConfigError("train: max_thresholds must be >= 1");
  if (gini_max_depth < 1) throw ConfigError("train: gini_max_depth must be >= 1");
}

// ---------------------------------------------------------------------------
// Split scoring

double z2_score(std::int64_t k_left, std::int64_t n_left, std::int64_t k_right, std::int64_t n_right) {
  if (n_left < 1 || n_right < 1 || k_left < 0 || k_right < 0 || k_left > n_left || k_right > n_right) {
    throw InputError("z2_score: invalid counts (" + std::to_string(k_left) + "/" + std::to_string(n_left) +
                     ", " + std::to_string(k_right) + "/" + std::to_string(n_right) + ")");
  }
  const double nl = static_cast<double>(n_left), nr = static_cast<double>(n_right);
  const double pl = static_cast<double>(k_left) / nl;
  const double pr = static_cast<double>(k_right) / nr;
  const double pooled = static_cast<double>(k_left + k_right) / (nl + nr);
  const double var = std::max(pooled * (1.0 - pooled), kZ2VarianceFloor);
  const double d = pl - pr;
  return d * d / (var * (1.0 / nl + 1.0 / nr));
}

namespace {

float midpoint(float a, float b) {
  const auto m = static_cast<float>((static_cast<double>(a) + static_cast<double>(b)) * 0.5);
  return m > a ? m : b;
}

}  // namespace

std::vector<float> candidate_thresholds(std::span<const float> sorted, std::size_t max_thresholds) {
  std::vector<float> mids;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i - 1] < sorted[i]) mids.push_back(midpoint(sorted[i - 1], sorted[i]));
  if (mids.size() <= max_thresholds || max_thresholds == 0) return max_thresholds == 0 ? std::vector<float>{} : mids;
  std::vector<float> picked(max_thresholds);
  if (max_thresholds == 1) {
    picked[0] = mids[(mids.size() - 1) / 2];
    return picked;
  }
  // Evenly spaced ranks 0 .. M-1; spacing exceeds one so ranks stay distinct.
  // The upper half is rounded from the top end so that the picked set mirrors
  // under a reversal of the value order.
  const std::size_t last = mids.size() - 1, k = max_thresholds - 1;
  const double step = static_cast<double>(last) / static_cast<double>(k);
  for (std::size_t i = 0; i <= k; ++i) {
    const std::size_t lo = std::min(i, k - i);
    const auto r = static_cast<std::size_t>(std::llround(static_cast<double>(lo) * step));
    picked[i] = mids[lo == i ? r : last - r];
  }
  return picked;
}

TrainingMatrix TrainingMatrix::build(std::span<const FeatureRow> rows, std::span<const std::uint16_t> labels,
                                     const Normalizer& norm) {
  if (rows.size() != labels.size()) throw TrainingError("training rows and labels differ in length");
  TrainingMatrix m;
  m.labels.assign(labels.begin(), labels.end());
  m.columns.assign(kFeatureCount, std::vector<float>(rows.size()));
  for (std::size_t f = 0; f < kFeatureCount; ++f)
    for (std::size_t i = 0; i < rows.size(); ++i) m.columns[f][i] = norm.apply(f, rows[i][f]);
  return m;
}

namespace {

struct Entry {
  float value;
  std::uint32_t pos;  // position within the node's sample list
};

std::vector<Entry> sorted_entries(const TrainingMatrix& data, std::span<const std::uint32_t> samples,
                                  std::size_t feature) {
  const auto& col = data.columns[feature];
  std::vector<Entry> e(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) e[i] = {col[samples[i]], static_cast<std::uint32_t>(i)};
  std::sort(e.begin(), e.end(), [](const Entry& a, const Entry& b) {
    return a.value < b.value || (a.value == b.value && a.pos < b.pos);
  });
  return e;
}

std::vector<float> entry_values(const std::vector<Entry>& e) {
  std::vector<float> v(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) v[i] = e[i].value;
  return v;
}

// fold_of[r * n + pos]: fold index of sample `pos` in repeat r.
std::vector<std::uint16_t> assign_folds(std::size_t n, const TrainConfig& cfg, std::uint64_t node_seed) {
  std::vector<std::uint16_t> fold_of(static_cast<std::size_t>(cfg.repeats) * n);
  std::vector<std::uint32_t> perm(n);
  for (int r = 0; r < cfg.repeats; ++r) {
    std::iota(perm.begin(), perm.end(), 0u);
    Rng rng(derive_seed(node_seed, static_cast<std::uint64_t>(Stream::folds), static_cast<std::uint64_t>(r)));
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng() % i);
      std::swap(perm[i - 1], perm[j]);
    }
    for (std::size_t q = 0; q < n; ++q)
      fold_of[static_cast<std::size_t>(r) * n + perm[q]] = static_cast<std::uint16_t>(q % cfg.k_folds);
  }
  return fold_of;
}

struct FeatureResult {
  bool valid = false;
  float threshold = 0.0f;
  double in_sample = 0.0;
  double generalization = 0.0;
};

FeatureResult evaluate_feature(const TrainingMatrix& data, std::span<const std::uint32_t> samples,
                               std::uint16_t pos_class, const TrainConfig& cfg,
                               const std::vector<std::uint16_t>& fold_of, std::size_t feature) {
  FeatureResult res;
  const auto entries = sorted_entries(data, samples, feature);
  const auto cands = candidate_thresholds(entry_values(entries),
                                          static_cast<std::size_t>(cfg.max_thresholds));
  if (cands.empty()) return res;

  const std::int64_t n = static_cast<std::int64_t>(entries.size());
  std::int64_t pos_total = 0;
  for (auto s : samples) pos_total += data.labels[s] == pos_class;

  std::int64_t nl = 0, kl = 0;
  std::size_t p = 0;
  for (float t : cands) {
    while (p < entries.size() && entries[p].value < t) {
      ++nl;
      kl += data.labels[samples[entries[p].pos]] == pos_class;
      ++p;
    }
    const std::int64_t nr = n - nl;
    if (nl < cfg.n_min || nr < cfg.n_min) continue;
    const double z = z2_score(kl, nl, pos_total - kl, nr);
    if (!res.valid || z > res.in_sample) {
      res.valid = true;
      res.in_sample = z;
      res.threshold = t;
    }
  }
  if (!res.valid) return res;

  // Re-score the fixed split on every held-out fold of every repeat.
  const auto k = static_cast<std::size_t>(cfg.k_folds);
  const auto& col = data.columns[feature];
  std::vector<std::int64_t> cnt(4 * k);
  double total = 0.0;
  const std::size_t ns = samples.size();
  for (int r = 0; r < cfg.repeats; ++r) {
    std::fill(cnt.begin(), cnt.end(), 0);
    for (std::size_t i = 0; i < ns; ++i) {
      const std::size_t f = fold_of[static_cast<std::size_t>(r) * ns + i];
      const bool left = col[samples[i]] < res.threshold;
      const bool pos = data.labels[samples[i]] == pos_class;
      cnt[4 * f + (left ? 0 : 2)] += 1;
      cnt[4 * f + (left ? 1 : 3)] += pos;
    }
    for (std::size_t f = 0; f < k; ++f) {
      const auto fnl = cnt[4 * f], fkl = cnt[4 * f + 1], fnr = cnt[4 * f + 2], fkr = cnt[4 * f + 3];
      if (fnl > 0 && fnr > 0) total += z2_score(fkl, fnl, fkr, fnr);
    }
  }
  res.generalization = total / static_cast<double>(k * static_cast<std::size_t>(cfg.repeats));
  return res;
}

std::optional<Split> pick(const std::array<FeatureResult, kFeatureCount>& results, double tau) {
  std::optional<Split> best;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto& r = results[f];
    if (!r.valid) continue;
    if (!best || r.generalization > best->score)
      best = Split{static_cast<std::uint16_t>(f), r.threshold, r.generalization};
  }
  if (best && !(best->score > tau)) return std::nullopt;
  return best;
}

bool splittable(const TrainingMatrix& data, std::span<const std::uint32_t> samples, const TrainConfig& cfg) {
  if (samples.size() < 2 * static_cast<std::size_t>(cfg.n_min)) return false;
  const auto first = data.labels[samples[0]];
  return std::any_of(samples.begin(), samples.end(), [&](auto s) { return data.labels[s] != first; });
}

}  // namespace

std::optional<Split> best_split_serial(const TrainingMatrix& data, std::span<const std::uint32_t> samples,
                                       std::uint16_t pos_class, const TrainConfig& cfg,
                                       std::uint64_t node_seed) {
  if (!splittable(data, samples, cfg)) return std::nullopt;
  const auto folds = assign_folds(samples.size(), cfg, node_seed);
  std::array<FeatureResult, kFeatureCount> results{};
  for (std::size_t f = 0; f < kFeatureCount; ++f)
    results[f] = evaluate_feature(data, samples, pos_class, cfg, folds, f);
  return pick(results, cfg.tau_sig);
}

std::optional<Split> best_split(const TrainingMatrix& data, std::span<const std::uint32_t> samples,
                                std::uint16_t pos_class, const TrainConfig& cfg, std::uint64_t node_seed) {
  if (!splittable(data, samples, cfg)) return std::nullopt;
  const auto folds = assign_folds(samples.size(), cfg, node_seed);
  std::array<FeatureResult, kFeatureCount> results{};
  const auto nf = static_cast<std::ptrdiff_t>(kFeatureCount);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t f = 0; f < nf; ++f)
    results[f] = evaluate_feature(data, samples, pos_class, cfg, folds, static_cast<std::size_t>(f));
  return pick(results, cfg.tau_sig);
}

std::optional<Split> best_gini_split(const TrainingMatrix& data, std::span<const std::uint32_t> samples,
                                     const TrainConfig& cfg) {
  if (!splittable(data, samples, cfg)) return std::nullopt;
  std::array<std::int64_t, kClassCount> total{};
  for (auto s : samples) ++total[data.labels[s]];
  const double n = static_cast<double>(samples.size());
  auto gini = [](const std::array<std::int64_t, kClassCount>& c, double m) {
    if (m <= 0.0) return 0.0;
    double g = 1.0;
    for (auto v : c) g -= (v / m) * (v / m);
    return g;
  };
  const double parent = gini(total, n);

  std::array<std::optional<Split>, kFeatureCount> per_feature{};
  const auto nf = static_cast<std::ptrdiff_t>(kFeatureCount);
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
  for (std::ptrdiff_t fi = 0; fi < nf; ++fi) {
    const auto f = static_cast<std::size_t>(fi);
    const auto entries = sorted_entries(data, samples, f);
    const auto cands = candidate_thresholds(entry_values(entries), static_cast<std::size_t>(cfg.max_thresholds));
    std::array<std::int64_t, kClassCount> left{};
    std::int64_t nl = 0;
    std::size_t p = 0;
    std::optional<Split> best;
    for (float t : cands) {
      while (p < entries.size() && entries[p].value < t) {
        ++left[data.labels[samples[entries[p].pos]]];
        ++nl;
        ++p;
      }
      const std::int64_t nr = static_cast<std::int64_t>(samples.size()) - nl;
      if (nl < cfg.n_min || nr < cfg.n_min) continue;
      std::array<std::int64_t, kClassCount> right{};
      for (std::size_t c = 0; c < kClassCount; ++c) right[c] = total[c] - left[c];
      const double dec = parent - (nl / n) * gini(left, static_cast<double>(nl)) -
                         (nr / n) * gini(right, static_cast<double>(nr));
      if (!best || dec > best->score) best = Split{static_cast<std::uint16_t>(f), t, dec};
    }
    per_feature[f] = best;
  }
  std::optional<Split> best;
  for (const auto& s : per_feature)
    if (s && (!best || s->score > best->score)) best = s;
  if (best && !(best->score > 0.0)) return std::nullopt;
  return best;
}

// ---------------------------------------------------------------------------
// Tree growth

namespace {

std::uint16_t majority(const TrainingMatrix& data, std::span<const std::uint32_t> samples) {
  std::array<std::size_t, kClassCount> counts{};
  for (auto s : samples) ++counts[data.labels[s]];
  return static_cast<std::uint16_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

// Keyed by the child's first (smallest) row id rather than its side, so that
// reversing a feature's order leaves every node's folds unchanged.
std::uint64_t child_key(std::uint64_t key, std::uint32_t first_row) {
  return splitmix64(key ^ splitmix64(static_cast<std::uint64_t>(first_row) + 1));
}

class Grower {
 public:
  Grower(const TrainingMatrix& data, const TrainConfig& cfg, ZTreeModel& model)
      : data_(data), cfg_(cfg), model_(model) {}

  std::uint32_t grow(std::vector<std::uint32_t> samples, std::uint64_t key, int depth) {
    const auto index = static_cast<std::uint32_t>(model_.nodes.size());
    model_.nodes.emplace_back();
    const std::uint16_t label = majority(data_, samples);

    std::optional<Split> split;
    if (cfg_.criterion == SplitCriterion::ztest) {
      const std::uint64_t node_seed = derive_seed(cfg_.seed, key, 0);
      split = cfg_.parallel ? best_split(data_, samples, label, cfg_, node_seed)
                            : best_split_serial(data_, samples, label, cfg_, node_seed);
    } else if (depth < cfg_.gini_max_depth) {
      split = best_gini_split(data_, samples, cfg_);
    }

    if (!split) {
      model_.nodes[index].is_leaf = true;
      model_.nodes[index].label = label;
      return index;
    }

    std::vector<std::uint32_t> left, right;
    const auto& col = data_.columns[split->feature];
    for (auto s : samples) (col[s] < split->threshold ? left : right).push_back(s);
    samples.clear();
    samples.shrink_to_fit();

    const auto left_key = child_key(key, left.front());
    const auto right_key = child_key(key, right.front());
    const auto l = grow(std::move(left), left_key, depth + 1);
    const auto r = grow(std::move(right), right_key, depth + 1);
    auto& node = model_.nodes[index];
    node.is_leaf = false;
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = r;
    node.label = label;
    return index;
  }

 private:
  const TrainingMatrix& data_;
  const TrainConfig& cfg_;
  ZTreeModel& model_;
};

}  // namespace

TrainedModel fit(std::span<const FeatureRow> rows, std::span<const std::uint16_t> labels, const TrainConfig& cfg) {
  cfg.validate();
  if (rows.empty()) throw TrainingError("fit: empty training set");
  if (rows.size() != labels.size())
    throw TrainingError("fit: " + std::to_string(rows.size()) + " rows but " + std::to_string(labels.size()) +
                        " labels");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (labels[i] >= kClassCount)
      throw TrainingError("fit: sample " + std::to_string(i) + " has label " + std::to_string(labels[i]));
    for (float v : rows[i])
      if (!std::isfinite(v)) throw TrainingError("fit: sample " + std::to_string(i) + " has a non-finite feature");
  }

  TrainedModel out;
  out.normalizer = Normalizer::fit(rows);
  const auto data = TrainingMatrix::build(rows, labels, out.normalizer);
  out.model.class_names = default_class_names();

  std::vector<std::uint32_t> all(rows.size());
  std::iota(all.begin(), all.end(), 0u);
  Grower(data, cfg, out.model).grow(std::move(all), 1, 0);
  return out;
}

std::uint16_t predict(const ZTreeModel& model, const Normalizer& norm, std::span<const float, kFeatureCount> x) {
  const TreeNode* nodes = model.nodes.data();
  std::uint32_t i = 0;
  while (!nodes[i].is_leaf) {
    const TreeNode& n = nodes[i];
    const float z = norm.apply(n.feature, x[n.feature]);
    i = z < n.threshold ? n.left : n.right;
  }
  return nodes[i].label;
}

std::uint16_t predict(const ZTreeModel& model, const Normalizer& norm, const FeatureVector& fv) {
  const FeatureRow row = to_row(fv);
  return predict(model, norm, std::span<const float, kFeatureCount>(row));
}

std::array<std::uint32_t, kFeatureCount> feature_importance(const ZTreeModel& model) {
  std::array<std::uint32_t, kFeatureCount> counts{};
  for (const auto& n : model.nodes)
    if (!n.is_leaf) ++counts.at(n.feature);
  return counts;
}

}  // namespace wavid
