// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "synthetic.hpp"
#include "wavid/ztree.hpp"

using namespace wavid;
using namespace wavid::testing;

namespace {

// Pearson chi-square of [[kL, nL-kL], [kR, nR-kR]] from expected counts.
double pearson(double kl, double nl, double kr, double nr) {
  const double obs[2][2] = {{kl, nl - kl}, {kr, nr - kr}};
  const double rows[2] = {nl, nr};
  const double cols[2] = {kl + kr, nl + nr - kl - kr};
  const double n = nl + nr;
  double chi = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double e = rows[i] * cols[j] / n;
      if (e > 0.0) chi += (obs[i][j] - e) * (obs[i][j] - e) / e;
    }
  return chi;
}

std::vector<std::uint32_t> iota_ids(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

double accuracy(const TrainedModel& t, const Labelled& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.rows.size(); ++i)
    ok += predict(t.model, t.normalizer, std::span<const float, kFeatureCount>(d.rows[i])) == d.labels[i];
  return static_cast<double>(ok) / static_cast<double>(d.rows.size());
}

Labelled nested_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::normal_distribution<float> g;
  Labelled d;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureRow r{};
    for (auto& v : r) v = g(rng);
    r[3] = u(rng);
    r[7] = u(rng);
    d.rows.push_back(r);
    d.labels.push_back(r[3] < 0.0f ? 0 : (r[7] < 0.0f ? 1 : 2));
  }
  return d;
}

ZTreeModel three_node(std::uint16_t feature, float threshold, std::uint16_t left, std::uint16_t right) {
  ZTreeModel m;
  m.class_names = default_class_names();
  m.nodes.resize(3);
  m.nodes[0] = {false, feature, threshold, 1, 2, 0};
  m.nodes[1] = {true, 0, 0.0f, 0, 0, left};
  m.nodes[2] = {true, 0, 0.0f, 0, 0, right};
  return m;
}

}  // namespace

TEST_CASE("z2 score on worked tables") {
  CHECK(z2_score(25, 50, 25, 50) == 0.0);
  CHECK(z2_score(40, 50, 10, 50) == doctest::Approx(36.0).epsilon(1e-12));
  CHECK(pearson(40, 50, 10, 50) == doctest::Approx(36.0).epsilon(1e-12));
  // Saturated split: p = 1 vs 0, pooled 0.25: 1 / (0.1875 * (1/10 + 1/30)) = 40.
  CHECK(z2_score(10, 10, 0, 30) == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(z2_score(0, 10, 0, 20) == 0.0);
}

TEST_CASE("z2 score equals the Pearson chi-square and is symmetric") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 10000; ++t) {
    const std::int64_t nl = 1 + static_cast<std::int64_t>(rng() % 500);
    const std::int64_t nr = 1 + static_cast<std::int64_t>(rng() % 500);
    const std::int64_t kl = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(nl + 1));
    const std::int64_t kr = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(nr + 1));
    const double z = z2_score(kl, nl, kr, nr);
    const double chi = pearson(kl, nl, kr, nr);
    CHECK(std::abs(z - chi) <= 1e-9 * std::max(1.0, chi));
    CHECK(z == doctest::Approx(z2_score(kr, nr, kl, nl)).epsilon(1e-12));
    CHECK(std::isfinite(z));
    CHECK(z >= 0.0);
  }
}

TEST_CASE("z2 score rejects invalid counts") {
  CHECK_THROWS_AS(z2_score(1, 0, 0, 5), InputError);
  CHECK_THROWS_AS(z2_score(6, 5, 0, 5), InputError);
  CHECK_THROWS_AS(z2_score(-1, 5, 0, 5), InputError);
  CHECK_THROWS_AS(z2_score(0, 5, 2, 1), InputError);
}

TEST_CASE("candidate thresholds are midpoints of distinct neighbours") {
  const std::vector<float> a = {1, 2, 3};
  CHECK(candidate_thresholds(a, 256) == std::vector<float>{1.5f, 2.5f});
  const std::vector<float> same = {5, 5, 5};
  CHECK(candidate_thresholds(same, 256).empty());

  const float lo = 1.0f, hi = std::nextafter(1.0f, 2.0f);
  const std::vector<float> tight = {lo, hi};
  const auto t = candidate_thresholds(tight, 256);
  REQUIRE(t.size() == 1);
  CHECK(lo < t[0]);
  CHECK(t[0] <= hi);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> v(1000);
  for (auto& x : v) x = u(rng);
  std::sort(v.begin(), v.end());
  const auto all = candidate_thresholds(v, 100000);
  const auto capped = candidate_thresholds(v, 256);
  CHECK(capped.size() == 256);
  const std::set<float> full(all.begin(), all.end());
  for (float c : capped) CHECK(full.count(c) == 1);
  CHECK(std::is_sorted(capped.begin(), capped.end()));
  CHECK(std::adjacent_find(capped.begin(), capped.end()) == capped.end());
}

TEST_CASE("separable feature yields a split near zero with a large score") {
  Labelled d;
  for (int i = 0; i < 200; ++i) {
    FeatureRow r{};
    r[0] = i < 100 ? -1.0f - 0.01f * i : 1.0f + 0.01f * i;
    d.rows.push_back(r);
    d.labels.push_back(i < 100 ? 0 : 1);
  }
  const auto m = TrainingMatrix::build(d.rows, d.labels, Normalizer::identity());
  const auto ids = iota_ids(200);
  TrainConfig cfg;
  const auto s = best_split(m, ids, 0, cfg, 11);
  REQUIRE(s.has_value());
  CHECK(s->feature == 0);
  CHECK(s->threshold > -1.0f);
  CHECK(s->threshold < 1.0f);
  // Each held-out fold is a saturated table with about 40 samples: chi-square = fold size.
  CHECK(s->score > 30.0);
}

TEST_CASE("no split for a pure node or constant features") {
  const auto d = blobs(30, 2, 3.0, 1);
  const auto m = TrainingMatrix::build(d.rows, d.labels, Normalizer::identity());
  std::vector<std::uint32_t> pure;
  for (std::uint32_t i = 0; i < d.labels.size(); ++i)
    if (d.labels[i] == 0) pure.push_back(i);
  TrainConfig cfg;
  cfg.n_min = 5;
  CHECK_FALSE(best_split(m, pure, 0, cfg, 1).has_value());

  std::vector<FeatureRow> flat(60, FeatureRow{});
  std::vector<std::uint16_t> lab(60);
  for (std::size_t i = 0; i < 60; ++i) lab[i] = static_cast<std::uint16_t>(i % 2);
  const auto mf = TrainingMatrix::build(flat, lab, Normalizer::identity());
  CHECK_FALSE(best_split(mf, iota_ids(60), 0, cfg, 1).has_value());
}

TEST_CASE("parallel split search equals the serial reference") {
  const auto d = blobs(60, 10, 1.0, 5);
  const auto m = TrainingMatrix::build(d.rows, d.labels, Normalizer::fit(d.rows));
  const auto ids = iota_ids(d.rows.size());
  TrainConfig cfg;
  for (std::uint16_t c = 0; c < 10; ++c) {
    const auto a = best_split(m, ids, c, cfg, 100 + c);
    const auto b = best_split_serial(m, ids, c, cfg, 100 + c);
    REQUIRE(a.has_value() == b.has_value());
    if (a) {
      CHECK(a->feature == b->feature);
      CHECK(a->threshold == b->threshold);
      CHECK(a->score == b->score);
    }
  }
}

TEST_CASE("single-class data gives one leaf") {
  auto d = blobs(50, 1, 0.0, 2);
  for (auto& l : d.labels) l = 4;
  const auto t = fit(d.rows, d.labels, TrainConfig{});
  REQUIRE(t.model.nodes.size() == 1);
  CHECK(t.model.nodes[0].is_leaf);
  CHECK(t.model.nodes[0].label == 4);
  CHECK(t.model.depth() == 0);
}

TEST_CASE("two separated classes give exactly three nodes") {
  const auto d = blobs(100, 2, 20.0, 3);
  const auto t = fit(d.rows, d.labels, TrainConfig{});
  CHECK(t.model.nodes.size() == 3);
  CHECK(accuracy(t, d) == 1.0);
}

TEST_CASE("a nested partition needs depth two and is learned") {
  const auto train = nested_data(400, 1);
  const auto test = nested_data(2000, 2);
  const auto t = fit(train.rows, train.labels, TrainConfig{});
  CHECK(t.model.depth() >= 2);
  CHECK(accuracy(t, test) >= 0.95);
}

TEST_CASE("every split leaf holds at least n_min training samples") {
  const auto d = blobs(80, 10, 1.5, 9);
  TrainConfig cfg;
  const auto t = fit(d.rows, d.labels, cfg);
  REQUIRE(t.model.nodes.size() > 1);
  std::vector<std::size_t> mass(t.model.nodes.size(), 0);
  for (const auto& r : d.rows) {
    std::uint32_t i = 0;
    while (!t.model.nodes[i].is_leaf) {
      const auto& n = t.model.nodes[i];
      i = t.normalizer.apply(n.feature, r[n.feature]) < n.threshold ? n.left : n.right;
    }
    ++mass[i];
  }
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (t.model.nodes[i].is_leaf) CHECK(mass[i] >= static_cast<std::size_t>(cfg.n_min));
}

TEST_CASE("predict agrees with a recursive traversal on random vectors") {
  const auto d = blobs(100, 10, 1.2, 4);
  const auto t = fit(d.rows, d.labels, TrainConfig{});
  REQUIRE(t.model.nodes.size() > 9);
  for (const auto& r : random_rows(10000, 2.0f, 8))
    CHECK(predict(t.model, t.normalizer, std::span<const float, kFeatureCount>(r)) ==
          recursive_predict(t.model, t.normalizer, r));
}

TEST_CASE("hand-built models follow the strict less-than rule") {
  const auto leaf = ZTreeModel::single_leaf(7);
  FeatureRow x{};
  CHECK(predict(leaf, Normalizer::identity(), std::span<const float, kFeatureCount>(x)) == 7);

  const auto m = three_node(5, 0.0f, 2, 8);
  x[5] = -1.0f;
  CHECK(predict(m, Normalizer::identity(), std::span<const float, kFeatureCount>(x)) == 2);
  x[5] = 0.0f;
  CHECK(predict(m, Normalizer::identity(), std::span<const float, kFeatureCount>(x)) == 8);
  CHECK(m.depth() == 1);
  CHECK(m.internal_count() == 1);
  CHECK(m.leaf_count() == 2);
}

TEST_CASE("feature importance counts internal nodes") {
  CHECK(feature_importance(ZTreeModel::single_leaf(0)) == std::array<std::uint32_t, kFeatureCount>{});
  const auto imp = feature_importance(three_node(5, 0.0f, 0, 1));
  CHECK(imp[5] == 1);
  CHECK(std::accumulate(imp.begin(), imp.end(), 0u) == 1);

  const auto d = blobs(60, 10, 1.0, 6);
  const auto t = fit(d.rows, d.labels, TrainConfig{});
  const auto all = feature_importance(t.model);
  CHECK(std::accumulate(all.begin(), all.end(), std::size_t{0}) == t.model.internal_count());
}

TEST_CASE("raising tau never grows the tree") {
  const auto d = blobs(60, 10, 0.8, 7);
  std::size_t prev = SIZE_MAX;
  for (double tau : {1.0, 3.84, 6.63, 10.83, 20.0}) {
    TrainConfig cfg;
    cfg.tau_sig = tau;
    const auto n = fit(d.rows, d.labels, cfg).model.nodes.size();
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("a monotone affine map of one column leaves predictions unchanged") {
  const auto train = blobs(60, 10, 1.0, 10);
  const auto test = blobs(20, 10, 1.0, 11);
  const auto base = fit(train.rows, train.labels, TrainConfig{});
  for (std::size_t f : {0u, 3u, 12u, 79u}) {
    for (auto [a, b] : {std::pair{2.0f, 0.0f}, std::pair{0.5f, -3.0f}, std::pair{-1.0f, 0.0f}, std::pair{-4.0f, 0.0f}}) {
      auto tr = train;
      auto te = test;
      for (auto& r : tr.rows) r[f] = a * r[f] + b;
      for (auto& r : te.rows) r[f] = a * r[f] + b;
      const auto moved = fit(tr.rows, tr.labels, TrainConfig{});
      CHECK(moved.model.nodes.size() == base.model.nodes.size());
      for (std::size_t i = 0; i < te.rows.size(); ++i)
        CHECK(predict(moved.model, moved.normalizer, std::span<const float, kFeatureCount>(te.rows[i])) ==
              predict(base.model, base.normalizer, std::span<const float, kFeatureCount>(test.rows[i])));
    }
  }
}

TEST_CASE("training is deterministic and independent of the parallel switch") {
  const auto d = blobs(50, 10, 1.0, 12);
  TrainConfig serial;
  serial.parallel = false;
  const auto a = fit(d.rows, d.labels, TrainConfig{});
  const auto b = fit(d.rows, d.labels, TrainConfig{});
  const auto c = fit(d.rows, d.labels, serial);
  CHECK(serialize(a.model, a.normalizer) == serialize(b.model, b.normalizer));
  CHECK(serialize(a.model, a.normalizer) == serialize(c.model, c.normalizer));
}

TEST_CASE("gini ablation tree respects its depth cap and n_min") {
  const auto d = blobs(60, 10, 0.6, 13);
  TrainConfig cfg;
  cfg.criterion = SplitCriterion::gini;
  cfg.gini_max_depth = 4;
  const auto t = fit(d.rows, d.labels, cfg);
  CHECK(t.model.depth() <= 4);
  t.model.validate();
  cfg.gini_max_depth = 20;
  const auto deep = fit(d.rows, d.labels, cfg);
  CHECK(deep.model.nodes.size() >= t.model.nodes.size());
  CHECK(deep.model.depth() <= 20);
}

TEST_CASE("fit rejects degenerate inputs") {
  const auto d = blobs(20, 2, 1.0, 14);
  CHECK_THROWS_AS(fit({}, {}, TrainConfig{}), TrainingError);
  CHECK_THROWS_AS(fit(d.rows, std::span(d.labels).first(5), TrainConfig{}), TrainingError);
  auto bad = d;
  bad.labels[3] = 10;
  CHECK_THROWS_AS(fit(bad.rows, bad.labels, TrainConfig{}), TrainingError);
  bad = d;
  bad.rows[2][7] = std::nanf("");
  CHECK_THROWS_AS(fit(bad.rows, bad.labels, TrainConfig{}), TrainingError);
  TrainConfig cfg;
  cfg.k_folds = 1;
  CHECK_THROWS_AS(fit(d.rows, d.labels, cfg), ConfigError);
  cfg = {};
  cfg.tau_sig = 0.0;
  CHECK_THROWS_AS(fit(d.rows, d.labels, cfg), ConfigError);
}

TEST_CASE("normalizer floors the standard deviation") {
  std::vector<FeatureRow> rows(10, FeatureRow{});
  for (std::size_t i = 0; i < 10; ++i) rows[i][1] = static_cast<float>(i);
  const auto n = Normalizer::fit(rows);
  CHECK(n.std[0] == Normalizer::kStdFloor);
  CHECK(n.mean[1] == 4.5f);
  CHECK(n.std[1] == doctest::Approx(std::sqrt(8.25)).epsilon(1e-6));
}

TEST_CASE("validate catches malformed node arrays") {
  auto m = three_node(5, 0.0f, 0, 1);
  m.validate();
  auto back = m;
  back.nodes[0].left = 0;
  CHECK_THROWS_AS(back.validate(), FormatError);
  auto shared = m;
  shared.nodes[0].right = 1;
  CHECK_THROWS_AS(shared.validate(), FormatError);
  auto label = m;
  label.nodes[2].label = 10;
  CHECK_THROWS_AS(label.validate(), FormatError);
  auto feature = m;
  feature.nodes[0].feature = 80;
  CHECK_THROWS_AS(feature.validate(), FormatError);
  auto thr = m;
  thr.nodes[0].threshold = INFINITY;
  CHECK_THROWS_AS(thr.validate(), FormatError);
}
