// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace wavid {

/// SplitMix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent sub-streams of one seed. Adding a stream never perturbs the
// others because each one hashes (seed, stream) separately.
enum class Stream : std::uint64_t {
  payload = 1,
  noise = 2,
  fading = 3,
  channel_params = 4,
  split = 5,
  folds = 6,
  vectors = 7,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream s) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(s)));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(seed ^ splitmix64(a)) ^ b);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, Stream s) { return Rng(derive_seed(seed, s)); }

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace wavid
