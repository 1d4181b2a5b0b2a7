// SPDX-License-Identifier: Apache-2.0
#include "wavid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

namespace wavid {

namespace {

void check_inputs(std::span<const std::uint16_t> truth, std::span<const std::uint16_t> pred,
                  std::span<const float> snr_db) {
  if (truth.size() != pred.size() || truth.size() != snr_db.size())
    throw InputError("evaluate: truth, prediction and SNR arrays differ in length");
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (truth[i] >= kClassCount || pred[i] >= kClassCount)
      throw InputError("evaluate: label out of range at sample " + std::to_string(i));
}

// Orders SNR keys numerically; float bit patterns would sort negatives wrongly.
struct SnrLess {
  bool operator()(float a, float b) const { return a < b; }
};

}  // namespace

EvalReport evaluate_predictions(std::span<const std::uint16_t> truth, std::span<const std::uint16_t> pred,
                                std::span<const float> snr_db) {
  check_inputs(truth, pred, snr_db);
  EvalReport r;
  r.total = truth.size();
  std::map<float, std::pair<std::uint64_t, std::uint64_t>, SnrLess> by_snr;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++r.confusion[truth[i]][pred[i]];
    if (!std::isnan(snr_db[i])) {
      auto& [n, ok] = by_snr[snr_db[i]];
      ++n;
      ok += truth[i] == pred[i];
    }
  }
  std::uint64_t correct = 0;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    correct += r.confusion[c][c];
    std::uint64_t row = 0, col = 0;
    for (std::size_t k = 0; k < kClassCount; ++k) {
      row += r.confusion[c][k];
      col += r.confusion[k][c];
    }
    const double tp = static_cast<double>(r.confusion[c][c]);
    r.precision_undefined[c] = col == 0;
    r.recall_undefined[c] = row == 0;
    r.precision[c] = col == 0 ? 0.0 : tp / static_cast<double>(col);
    r.recall[c] = row == 0 ? 0.0 : tp / static_cast<double>(row);
    const double pr = r.precision[c] + r.recall[c];
    r.f1[c] = pr > 0.0 ? 2.0 * r.precision[c] * r.recall[c] / pr : 0.0;
  }
  std::size_t present = 0;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    if (r.precision_undefined[c] && r.recall_undefined[c]) continue;
    ++present;
    r.macro_precision += r.precision[c];
    r.macro_recall += r.recall[c];
    r.macro_f1 += r.f1[c];
  }
  if (present > 0) {
    r.macro_precision /= static_cast<double>(present);
    r.macro_recall /= static_cast<double>(present);
    r.macro_f1 /= static_cast<double>(present);
  }
  r.accuracy = r.total ? static_cast<double>(correct) / static_cast<double>(r.total) : 0.0;
  for (const auto& [snr, counts] : by_snr)
    r.per_snr.push_back({snr, counts.first, static_cast<double>(counts.second) / static_cast<double>(counts.first)});
  return r;
}

PairSeries confusion_pair_series(std::span<const std::uint16_t> truth, std::span<const std::uint16_t> pred,
                                 std::span<const float> snr_db, std::uint16_t class_a, std::uint16_t class_b) {
  check_inputs(truth, pred, snr_db);
  if (class_a >= kClassCount || class_b >= kClassCount || class_a == class_b)
    throw InputError("confusion pair needs two distinct valid classes");
  struct Tally {
    std::uint64_t na = 0, ab = 0, nb = 0, ba = 0;
  };
  std::map<float, Tally, SnrLess> by_snr;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (std::isnan(snr_db[i])) continue;
    auto& t = by_snr[snr_db[i]];
    if (truth[i] == class_a) {
      ++t.na;
      t.ab += pred[i] == class_b;
    } else if (truth[i] == class_b) {
      ++t.nb;
      t.ba += pred[i] == class_a;
    }
  }
  PairSeries s{class_a, class_b, {}};
  for (const auto& [snr, t] : by_snr) {
    s.rates.push_back({snr, t.na ? static_cast<double>(t.ab) / static_cast<double>(t.na) : 0.0,
                       t.nb ? static_cast<double>(t.ba) / static_cast<double>(t.nb) : 0.0});
  }
  return s;
}

namespace {

struct Predicted {
  std::vector<std::uint16_t> truth, pred;
  std::vector<float> snr;
};

Predicted predict_subset(const ZTreeModel& model, const Normalizer& norm, const Dataset& ds,
                         std::span<const std::uint32_t> ids) {
  if (!ds.has_features()) throw InputError("evaluate: dataset has no stored features");
  Predicted p;
  p.truth.reserve(ids.size());
  p.pred.reserve(ids.size());
  p.snr.reserve(ids.size());
  for (auto i : ids) {
    const auto& r = ds.records.at(i);
    p.truth.push_back(r.label);
    p.pred.push_back(predict(model, norm, std::span<const float, kFeatureCount>(r.features)));
    p.snr.push_back(r.snr_db);
  }
  return p;
}

}  // namespace

EvalReport evaluate(const ZTreeModel& model, const Normalizer& norm, const Dataset& ds,
                    std::span<const std::uint32_t> ids) {
  const auto p = predict_subset(model, norm, ds, ids);
  return evaluate_predictions(p.truth, p.pred, p.snr);
}

PairSeries confusion_vs_snr(const ZTreeModel& model, const Normalizer& norm, const Dataset& ds,
                            std::span<const std::uint32_t> ids, std::uint16_t class_a, std::uint16_t class_b) {
  const auto p = predict_subset(model, norm, ds, ids);
  return confusion_pair_series(p.truth, p.pred, p.snr, class_a, class_b);
}

std::vector<ConfusionPair> ranked_confusion_pairs(const Confusion& c) {
  std::vector<ConfusionPair> pairs;
  for (std::uint16_t a = 0; a < kClassCount; ++a)
    for (std::uint16_t b = a + 1; b < kClassCount; ++b) pairs.push_back({a, b, c[a][b] + c[b][a]});
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x.count > y.count; });
  return pairs;
}

std::string report_json(const EvalReport& r, std::span<const std::string> class_names) {
  using nlohmann::json;
  json j;
  j["accuracy"] = r.accuracy;
  j["total"] = r.total;
  j["macro"] = {{"precision", r.macro_precision}, {"recall", r.macro_recall}, {"f1", r.macro_f1}};
  json classes = json::array();
  for (std::size_t c = 0; c < kClassCount; ++c) {
    json e = {{"class", c < class_names.size() ? class_names[c] : std::to_string(c)},
              {"precision", r.precision[c]},
              {"recall", r.recall[c]},
              {"f1", r.f1[c]}};
    if (r.precision_undefined[c]) e["precision_undefined"] = true;
    if (r.recall_undefined[c]) e["recall_undefined"] = true;
    classes.push_back(e);
  }
  j["classes"] = classes;
  j["confusion"] = r.confusion;
  json snr = json::array();
  for (const auto& s : r.per_snr) snr.push_back({{"snr_db", s.snr_db}, {"count", s.count}, {"accuracy", s.accuracy}});
  j["per_snr"] = snr;
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    json rates = json::array();
    for (const auto& x : p.rates) rates.push_back({{"snr_db", x.snr_db}, {"a_to_b", x.a_to_b}, {"b_to_a", x.b_to_a}});
    pairs.push_back({{"a", p.class_a}, {"b", p.class_b}, {"rates", rates}});
  }
  j["pairs"] = pairs;
  return j.dump(2);
}

std::string report_table(const EvalReport& r, std::span<const std::string> class_names) {
  auto name = [&](std::size_t c) { return c < class_names.size() ? class_names[c] : std::to_string(c); };
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %9s %9s %9s\n", "class", "precision", "recall", "f1");
  out += line;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    std::snprintf(line, sizeof line, "%-8s %9.4f %9.4f %9.4f\n", name(c).c_str(), r.precision[c], r.recall[c], r.f1[c]);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-8s %9.4f %9.4f %9.4f\n", "macro", r.macro_precision, r.macro_recall,
                r.macro_f1);
  out += line;
  std::snprintf(line, sizeof line, "accuracy %.4f over %llu samples\n\n", r.accuracy,
                static_cast<unsigned long long>(r.total));
  out += line;

  out += "confusion (rows true, columns predicted)\n        ";
  for (std::size_t c = 0; c < kClassCount; ++c) {
    std::snprintf(line, sizeof line, "%7s", name(c).c_str());
    out += line;
  }
  out += "\n";
  for (std::size_t t = 0; t < kClassCount; ++t) {
    std::snprintf(line, sizeof line, "%-8s", name(t).c_str());
    out += line;
    for (std::size_t p = 0; p < kClassCount; ++p) {
      std::snprintf(line, sizeof line, "%7llu", static_cast<unsigned long long>(r.confusion[t][p]));
      out += line;
    }
    out += "\n";
  }
  if (!r.per_snr.empty()) {
    out += "\nsnr_db  count  accuracy\n";
    for (const auto& s : r.per_snr) {
      std::snprintf(line, sizeof line, "%6.1f %6llu  %8.4f\n", s.snr_db, static_cast<unsigned long long>(s.count),
                    s.accuracy);
      out += line;
    }
  }
  for (const auto& p : r.pairs) {
    std::snprintf(line, sizeof line, "\nsnr_db  %s->%s  %s->%s\n", name(p.class_a).c_str(), name(p.class_b).c_str(),
                  name(p.class_b).c_str(), name(p.class_a).c_str());
    out += line;
    for (const auto& x : p.rates) {
      std::snprintf(line, sizeof line, "%6.1f  %8.4f  %8.4f\n", x.snr_db, x.a_to_b, x.b_to_a);
      out += line;
    }
  }
  return out;
}

}  // namespace wavid
