// SPDX-License-Identifier: Apache-2.0
#include "wavid/ztree.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "byteio.hpp"

namespace wavid {

namespace {

constexpr char kMagic[4] = {'Z', 'T', 'R', 'E'};

}  // namespace

std::vector<std::uint8_t> serialize(const ZTreeModel& model, const Normalizer& norm) {
  model.validate();
  detail::ByteWriter w;
  w.bytes(kMagic, 4);
  w.le<std::uint16_t>(kModelFormatVersion);
  w.le<std::uint16_t>(model.n_features);
  w.le<std::uint16_t>(model.class_count);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(model.nodes.size()));
  for (const auto& n : model.nodes) {
    w.le<std::uint8_t>(n.is_leaf ? 1 : 0);
    w.le<std::uint16_t>(n.feature);
    w.f32(n.threshold);
    w.le<std::uint32_t>(n.left);
    w.le<std::uint32_t>(n.right);
    w.le<std::uint16_t>(n.label);
  }
  for (float m : norm.mean) w.f32(m);
  for (float s : norm.std) w.f32(s);
  const auto names = model.class_names.empty() ? default_class_names() : model.class_names;
  for (const auto& name : names) {
    if (name.size() > 255) throw FormatError("class name longer than 255 bytes: " + name.substr(0, 32));
    w.le<std::uint8_t>(static_cast<std::uint8_t>(name.size()));
    w.bytes(name.data(), name.size());
  }
  return w.take();
}

TrainedModel deserialize(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "model file");
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("magic mismatch: not a ZTRE model file");
  r.str(4, "magic");
  const auto version = r.le<std::uint16_t>("version");
  if (version != kModelFormatVersion)
    throw FormatError("model format version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kModelFormatVersion) + ")");

  TrainedModel out;
  auto& m = out.model;
  m.n_features = r.le<std::uint16_t>("feature count");
  m.class_count = r.le<std::uint16_t>("class count");
  if (m.n_features != kFeatureCount) throw FormatError("model feature count must be 80");
  if (m.class_count == 0 || m.class_count > 1024) throw FormatError("model class count out of range");
  const auto count = r.le<std::uint32_t>("node count");
  if (count == 0) throw FormatError("model has no nodes");
  if (static_cast<std::size_t>(count) * kNodeRecordBytes > r.remaining())
    throw FormatError("model file truncated: node table needs " + std::to_string(count) + " records");
  m.nodes.resize(count);
  for (auto& n : m.nodes) {
    const auto leaf = r.le<std::uint8_t>("node");
    if (leaf > 1) throw FormatError("node leaf flag must be 0 or 1");
    n.is_leaf = leaf == 1;
    n.feature = r.le<std::uint16_t>("node");
    n.threshold = r.f32("node");
    n.left = r.le<std::uint32_t>("node");
    n.right = r.le<std::uint32_t>("node");
    n.label = r.le<std::uint16_t>("node");
  }
  for (auto& v : out.normalizer.mean) v = r.f32("normalizer mean");
  for (auto& v : out.normalizer.std) {
    v = r.f32("normalizer std");
    if (!(v >= Normalizer::kStdFloor) || !std::isfinite(v)) throw FormatError("normalizer std below floor");
  }
  for (float v : out.normalizer.mean)
    if (!std::isfinite(v)) throw FormatError("normalizer mean is not finite");
  for (std::size_t c = 0; c < m.class_count; ++c) {
    const auto len = r.le<std::uint8_t>("class name");
    m.class_names.push_back(r.str(len, "class name"));
  }
  if (r.remaining() != 0)
    throw FormatError("model file has " + std::to_string(r.remaining()) + " trailing bytes");
  m.validate();
  return out;
}

void save_model(const std::string& path, const ZTreeModel& model, const Normalizer& norm) {
  detail::write_file(path, serialize(model, norm));
}

TrainedModel load_model(const std::string& path) {
  const auto bytes = detail::read_file(path);
  try {
    return deserialize(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace wavid
