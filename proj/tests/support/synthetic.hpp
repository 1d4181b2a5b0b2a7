// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <vector>

#include "wavid/ztree.hpp"

namespace wavid::testing {

struct Labelled {
  std::vector<FeatureRow> rows;
  std::vector<std::uint16_t> labels;
};

// Gaussian blobs: class c shifts features c and c + 10 by `sep`; every other
// column is unit noise.
inline Labelled blobs(std::size_t per_class, std::size_t classes, double sep, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  Labelled d;
  for (std::size_t i = 0; i < per_class * classes; ++i) {
    const auto c = static_cast<std::uint16_t>(i % classes);
    FeatureRow r{};
    for (auto& v : r) v = g(rng);
    r[c] += static_cast<float>(sep);
    r[c + 10] += static_cast<float>(sep * 0.5);
    d.rows.push_back(r);
    d.labels.push_back(c);
  }
  return d;
}

// Independent recursive traversal of the documented rule.
inline std::uint16_t recursive_predict(const ZTreeModel& m, const Normalizer& norm, const FeatureRow& x,
                                       std::uint32_t i = 0) {
  const auto& n = m.nodes.at(i);
  if (n.is_leaf) return n.label;
  const float z = (x[n.feature] - norm.mean[n.feature]) / norm.std[n.feature];
  return recursive_predict(m, norm, x, z < n.threshold ? n.left : n.right);
}

inline std::vector<FeatureRow> random_rows(std::size_t n, float scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, scale);
  std::vector<FeatureRow> out(n);
  for (auto& r : out)
    for (auto& v : r) v = g(rng);
  return out;
}

}  // namespace wavid::testing
