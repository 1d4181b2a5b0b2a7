// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wavid/ztree.hpp"

namespace wavid {

/// Self-contained C99 header: node array, normalizer arrays and
/// `int wavid_predict(const float x[80])`. Deterministic text; thresholds and
/// normalizer values are written as exact hexadecimal float literals.
std::string emit_c99_header(const ZTreeModel& model, const Normalizer& norm);

/// Bytes of static data the emitted header defines (node array with the C
/// struct's natural padding plus both normalizer arrays).
inline constexpr std::size_t kEmittedNodeBytes = 20;
std::size_t emitted_footprint_bytes(const ZTreeModel& model);

struct TestVectors {
  std::vector<FeatureRow> rows;
  std::vector<std::uint16_t> labels;
  std::size_t threshold_adjacent = 0;  // rows placed within a few ulps of a split
};

/// Reference-labelled vectors for conformance checks: a rotation of `base`
/// rows, rows nudged to land within +-3 ulps of a split threshold after
/// normalization, and random rows around the training distribution.
TestVectors make_test_vectors(const ZTreeModel& model, const Normalizer& norm, std::span<const FeatureRow> base,
                              std::size_t count, std::uint64_t seed);

/// Raw little-endian float32 files: vectors are count x 80 values, labels are
/// count values (class codes stored as floats).
void write_test_vectors(const TestVectors& tv, const std::string& vectors_path, const std::string& labels_path);
TestVectors read_test_vectors(const std::string& vectors_path, const std::string& labels_path);

}  // namespace wavid
