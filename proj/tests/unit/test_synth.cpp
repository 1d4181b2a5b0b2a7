// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "wavid/fft.hpp"
#include "wavid/synth.hpp"

using namespace wavid;

namespace {

double energy(const std::vector<cplx>& pts) {
  double e = 0.0;
  for (const auto& p : pts) e += std::norm(p);
  return e / static_cast<double>(pts.size());
}

// Every nearest neighbour of every point differs from it in exactly one bit.
void check_gray(const std::vector<cplx>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double dmin = 1e300;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) dmin = std::min(dmin, std::abs(pts[i] - pts[j]));
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i && std::abs(pts[i] - pts[j]) < dmin * (1.0 + 1e-9))
        CHECK(std::popcount(static_cast<unsigned>(i ^ j)) == 1);
  }
}

}  // namespace

TEST_CASE("constellations have unit average energy and the right size") {
  for (auto m : kAllModulations) {
    const auto& pts = constellation(m);
    CHECK(pts.size() == (std::size_t{1} << bits_per_symbol(m)));
    CHECK(energy(pts) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("PSK and square QAM are Gray coded") {
  check_gray(constellation(ModulationScheme::QPSK));
  check_gray(constellation(ModulationScheme::PSK8));
  check_gray(constellation(ModulationScheme::QAM256));
}

TEST_CASE("map_symbols groups bits MSB first and rejects ragged input") {
  const std::vector<std::uint8_t> bits = {1, 0, 0, 1, 1, 1};
  const auto sym = map_symbols(bits, ModulationScheme::PSK8);
  REQUIRE(sym.size() == 2);
  CHECK(sym[0] == constellation(ModulationScheme::PSK8)[4]);
  CHECK(sym[1] == constellation(ModulationScheme::PSK8)[7]);
  CHECK_THROWS_AS(map_symbols(std::span(bits).first(5), ModulationScheme::QPSK), InputError);
}

TEST_CASE("every legal pair yields 1024 unit-power samples deterministically") {
  for (auto w : kAllWaveforms) {
    for (auto m : legal_modulations(w)) {
      CAPTURE(to_string(w));
      CAPTURE(to_string(m));
      const auto a = synth_segment(w, m, 42);
      const auto b = synth_segment(w, m, 42);
      const auto c = synth_segment(w, m, 43);
      CHECK(a.samples.size() == kSegmentLength);
      CHECK(std::abs(mean_power(a.samples) - 1.0) < 1e-6);
      CHECK(a.samples == b.samples);
      CHECK(a.samples != c.samples);
      CHECK(a.waveform == w);
      CHECK(a.modulation == m);
      CHECK_FALSE(a.snr_db.has_value());
    }
  }
}

TEST_CASE("FSK waveforms accept only the 4-ary and 8-ary alphabets") {
  CHECK(legal_modulations(WaveformClass::GFSK).size() == 2);
  CHECK(legal_modulations(WaveformClass::OFDM).size() == kModulationCount);
  try {
    synth_segment(WaveformClass::MFSK, ModulationScheme::QAM256, 1);
    FAIL("illegal pair accepted");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("MFSK") != std::string::npos);
    CHECK(msg.find("256QAM") != std::string::npos);
  }
}

TEST_CASE("Chebyshev window matches reference values") {
  const std::vector<double> ref16 = {0.11376044581257719, 0.19636543675259405, 0.33194642705414146,
                                     0.49260347666073756, 0.6613102439610726,  0.8163363541330617,
                                     0.935340747825203,   1.0};
  const auto w16 = chebyshev_window(16, 40.0);
  REQUIRE(w16.size() == 16);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(w16[i] == doctest::Approx(ref16[i]).epsilon(1e-10));
    CHECK(w16[15 - i] == doctest::Approx(ref16[i]).epsilon(1e-10));
  }
  const std::vector<double> ref7 = {0.11169109836363099, 0.41962998924433415, 0.813773592568722, 1.0,
                                    0.813773592568722,   0.41962998924433415, 0.11169109836363099};
  const auto w7 = chebyshev_window(7, 50.0);
  REQUIRE(w7.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) CHECK(w7[i] == doctest::Approx(ref7[i]).epsilon(1e-10));
  CHECK_THROWS_AS(chebyshev_window(1, 40.0), InputError);
}

TEST_CASE("SRRC taps are symmetric, unit energy and self-convolve to a Nyquist pulse") {
  const int sps = 8, span = 16;
  const auto h = srrc_taps(0.25, span, sps);
  REQUIRE(h.size() == static_cast<std::size_t>(span * sps + 1));
  double e = 0.0;
  for (double v : h) e += v * v;
  CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] == doctest::Approx(h[h.size() - 1 - i]).epsilon(1e-12));

  std::vector<double> rc(2 * h.size() - 1, 0.0);
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = 0; j < h.size(); ++j) rc[i + j] += h[i] * h[j];
  const std::size_t centre = h.size() - 1;
  CHECK(rc[centre] == doctest::Approx(1.0).epsilon(1e-12));
  for (int k = 1; k <= 6; ++k) {
    CHECK(std::abs(rc[centre + k * sps]) < 5e-3);
    CHECK(std::abs(rc[centre - k * sps]) < 5e-3);
  }
}

TEST_CASE("PHYDYAS prototype is symmetric with energy M") {
  const auto p = phydyas_prototype(32, 4);
  REQUIRE(p.size() == 127);
  double e = 0.0;
  for (double v : p) e += v * v;
  CHECK(e == doctest::Approx(32.0).epsilon(1e-12));
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(p[p.size() - 1 - i]).epsilon(1e-12));
  CHECK(std::max_element(p.begin(), p.end()) - p.begin() == 63);
  CHECK_THROWS_AS(phydyas_prototype(32, 3), ConfigError);
}

TEST_CASE("OFDM symbols carry a cyclic prefix of 8 at period 40") {
  const auto s = synth_segment(WaveformClass::OFDM, ModulationScheme::QAM256, 5).samples;
  for (int sym = 0; sym < 25; ++sym)
    for (int i = 0; i < 8; ++i) CHECK(s[sym * 40 + i] == s[sym * 40 + i + 32]);
}

TEST_CASE("DSSS chips follow the spreading code") {
  const auto s = synth_segment(WaveformClass::DSSS, ModulationScheme::QPSK, 9).samples;
  for (int n = 0; n < static_cast<int>(kSegmentLength); ++n) {
    const cplx symbol = s[(n / 16) * 16] * static_cast<double>(kDsssCode[0]);
    CHECK(std::abs(s[n] - symbol * static_cast<double>(kDsssCode[n % 16])) < 1e-12);
  }
}

TEST_CASE("LoRa, GFSK and MFSK have constant envelope") {
  for (auto w : {WaveformClass::LoRa, WaveformClass::GFSK, WaveformClass::MFSK}) {
    const auto s = synth_segment(w, ModulationScheme::PSK8, 3).samples;
    for (const auto& v : s) CHECK(std::abs(std::abs(v) - 1.0) < 1e-9);
  }
}

TEST_CASE("LoRa instantaneous frequency sweeps upward inside each chirp") {
  const auto s = synth_segment(WaveformClass::LoRa, ModulationScheme::QPSK, 11).samples;
  int rises = 0, drops = 0;
  for (std::size_t n = 1; n + 1 < s.size(); ++n) {
    const double f0 = std::arg(s[n] * std::conj(s[n - 1]));
    const double f1 = std::arg(s[n + 1] * std::conj(s[n]));
    (f1 > f0 ? rises : drops)++;
  }
  // One wrap per chirp plus one per payload shift at most.
  CHECK(drops <= 16);
  CHECK(rises > 1000);
}

TEST_CASE("NB-IoT energy stays in a narrow band") {
  const auto s = synth_segment(WaveformClass::NBIoT, ModulationScheme::QPSK, 4).samples;
  const auto X = fft_radix2(s);
  double inband = 0.0, total = 0.0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    const auto kk = static_cast<long>(k < X.size() / 2 ? k : k - X.size()) * 1;
    const double p = std::norm(X[k]);
    total += p;
    if (std::labs(kk) <= 32) inband += p;
  }
  CHECK(inband / total > 0.9);
}

TEST_CASE("OTFS pilot guard leaves a single pulse per Doppler block") {
  const auto s = synth_segment(WaveformClass::OTFS, ModulationScheme::QPSK, 21).samples;
  const double pilot = std::abs(s[16]);
  CHECK(pilot > 1.0);
  for (int block = 0; block < 32; ++block) {
    for (int t = 12; t <= 20; ++t) {
      if (t == 16)
        CHECK(std::abs(s[block * 32 + t]) == doctest::Approx(pilot).epsilon(1e-9));
      else
        CHECK(std::abs(s[block * 32 + t]) < 1e-9);
    }
  }
}

TEST_CASE("normalize_power rejects silence") {
  std::vector<cplx> z(8);
  CHECK_THROWS_AS(normalize_power(z), NumericError);
}
