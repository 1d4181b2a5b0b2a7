// SPDX-License-Identifier: Apache-2.0
#include "wavid/export.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "byteio.hpp"
#include "wavid/rng.hpp"

namespace wavid {

namespace {

std::string hex_float(float v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%af", static_cast<double>(v));
  return buf;
}

void emit_float_array(std::string& out, const char* name, const std::array<float, kFeatureCount>& values) {
  out += "static const float ";
  out += name;
  out += "[WAVID_FEATURE_COUNT] = {\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += i % 4 == 0 ? "    " : " ";
    out += hex_float(values[i]);
    out += i + 1 < values.size() ? "," : "";
    if (i % 4 == 3 || i + 1 == values.size()) out += "\n";
  }
  out += "};\n\n";
}

}  // namespace

std::size_t emitted_footprint_bytes(const ZTreeModel& model) {
  return model.nodes.size() * kEmittedNodeBytes + 2 * kFeatureCount * sizeof(float);
}

std::string emit_c99_header(const ZTreeModel& model, const Normalizer& norm) {
  model.validate();
  std::string out;
  out += "/* ZTree waveform classifier, model format version " + std::to_string(kModelFormatVersion) +
         ". Generated by wavid; do not edit. */\n";
  out += "#ifndef WAVID_MODEL_H\n#define WAVID_MODEL_H\n\n#include <stdint.h>\n\n";
  out += "#define WAVID_FEATURE_COUNT 80\n";
  out += "#define WAVID_CLASS_COUNT " + std::to_string(model.class_count) + "\n";
  out += "#define WAVID_NODE_COUNT " + std::to_string(model.nodes.size()) + "\n\n";
  out += "typedef struct {\n    uint8_t is_leaf;\n    uint16_t feature;\n    float threshold;\n"
         "    uint32_t left;\n    uint32_t right;\n    uint16_t label;\n} wavid_node;\n\n";

  out += "/* is_leaf, feature, threshold, left, right, label */\n";
  out += "static const wavid_node wavid_nodes[WAVID_NODE_COUNT] = {\n";
  for (std::size_t i = 0; i < model.nodes.size(); ++i) {
    const auto& n = model.nodes[i];
    out += "    {" + std::to_string(n.is_leaf ? 1 : 0) + "u, " + std::to_string(n.feature) + "u, " +
           hex_float(n.threshold) + ", " + std::to_string(n.left) + "u, " + std::to_string(n.right) + "u, " +
           std::to_string(n.label) + "u}";
    out += i + 1 < model.nodes.size() ? ",\n" : "\n";
  }
  out += "};\n\n";
  emit_float_array(out, "wavid_mean", norm.mean);
  emit_float_array(out, "wavid_std", norm.std);

  out += "/* Returns the class code of one raw (unnormalized) feature vector. */\n";
  out += "static int wavid_predict(const float x[WAVID_FEATURE_COUNT])\n{\n";
  if (model.nodes.size() == 1) {
    out += "    (void)x;\n    return " + std::to_string(model.nodes[0].label) + ";\n";
  } else {
    out += "    uint32_t i = 0u;\n";
    out += "    while (!wavid_nodes[i].is_leaf) {\n";
    out += "        const wavid_node *n = &wavid_nodes[i];\n";
    out += "        const float z = (x[n->feature] - wavid_mean[n->feature]) / wavid_std[n->feature];\n";
    out += "        i = z < n->threshold ? n->left : n->right;\n";
    out += "    }\n";
    out += "    return (int)wavid_nodes[i].label;\n";
  }
  out += "}\n\n#endif\n";
  return out;
}

TestVectors make_test_vectors(const ZTreeModel& model, const Normalizer& norm, std::span<const FeatureRow> base,
                              std::size_t count, std::uint64_t seed) {
  model.validate();
  std::vector<std::size_t> internal;
  for (std::size_t i = 0; i < model.nodes.size(); ++i)
    if (!model.nodes[i].is_leaf) internal.push_back(i);

  Rng rng = make_rng(seed, Stream::vectors);
  std::normal_distribution<double> gauss(0.0, 1.5);
  auto random_row = [&] {
    FeatureRow r;
    for (std::size_t f = 0; f < kFeatureCount; ++f)
      r[f] = static_cast<float>(gauss(rng) * norm.std[f] + norm.mean[f]);
    return r;
  };

  TestVectors tv;
  tv.rows.reserve(count);
  std::size_t next_base = 0;
  for (std::size_t i = 0; i < count; ++i) {
    FeatureRow row;
    const int kind = static_cast<int>(i % 3);
    if (kind == 0 && !base.empty()) {
      row = base[next_base++ % base.size()];
    } else if (kind == 1 && !internal.empty()) {
      row = base.empty() ? random_row() : base[static_cast<std::size_t>(rng() % base.size())];
      const auto& node = model.nodes[internal[static_cast<std::size_t>(rng() % internal.size())]];
      const std::size_t f = node.feature;
      // Raw value whose normalized image sits on the threshold, then nudged.
      float x = node.threshold * norm.std[f] + norm.mean[f];
      const int steps = static_cast<int>(rng() % 7) - 3;
      for (int s = 0; s < std::abs(steps); ++s)
        x = std::nextafter(x, steps > 0 ? INFINITY : -INFINITY);
      row[f] = x;
      ++tv.threshold_adjacent;
    } else {
      row = random_row();
    }
    tv.rows.push_back(row);
    tv.labels.push_back(predict(model, norm, std::span<const float, kFeatureCount>(row)));
  }
  return tv;
}

void write_test_vectors(const TestVectors& tv, const std::string& vectors_path, const std::string& labels_path) {
  if (tv.rows.size() != tv.labels.size()) throw InputError("test vectors and labels differ in count");
  detail::ByteWriter v, l;
  for (const auto& r : tv.rows)
    for (float x : r) v.f32(x);
  for (auto lab : tv.labels) l.f32(static_cast<float>(lab));
  detail::write_file(vectors_path, v.take());
  detail::write_file(labels_path, l.take());
}

TestVectors read_test_vectors(const std::string& vectors_path, const std::string& labels_path) {
  const auto vb = detail::read_file(vectors_path);
  const auto lb = detail::read_file(labels_path);
  if (vb.empty() || vb.size() % (4 * kFeatureCount) != 0)
    throw FormatError(vectors_path + ": size is not a positive multiple of 80 float32 values");
  const std::size_t n = vb.size() / (4 * kFeatureCount);
  if (lb.size() != 4 * n) throw FormatError(labels_path + ": expected " + std::to_string(n) + " float32 labels");
  detail::ByteReader vr(vb, vectors_path), lr(lb, labels_path);
  TestVectors tv;
  tv.rows.resize(n);
  tv.labels.resize(n);
  for (auto& r : tv.rows)
    for (auto& x : r) x = vr.f32("vector");
  for (auto& lab : tv.labels) {
    const float v = lr.f32("label");
    if (!(v >= 0.0f && v < 65536.0f) || v != std::floor(v)) throw FormatError(labels_path + ": label is not a class code");
    lab = static_cast<std::uint16_t>(v);
  }
  return tv;
}

}  // namespace wavid
