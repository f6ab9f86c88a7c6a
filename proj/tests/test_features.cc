// tests/test_features.cc

// Copyright  2026  pmtl authors

// See ../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "common.h"
#include "frame_features.h"
#include "test_util.h"

using namespace pmtl;

namespace {

constexpr int kSr = 16000;

std::vector<double> Harmonic(double f0, int n, int harmonics = 4, double phase = 0.3) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i)
    for (int k = 1; k <= harmonics; ++k)
      x[i] += std::sin(2 * M_PI * k * f0 * i / kSr + k * phase) / k;
  return x;
}

// Brute-force normalised autocorrelation pitch: the lag in [32, 320] with
// the largest correlation that is not a multiple of a shorter near-equal
// peak, refined by a parabola. Written independently of the library code.
double OraclePitch(const std::vector<double> &frame) {
  const int n = static_cast<int>(frame.size());
  double mean = 0;
  for (double v : frame) mean += v / n;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = frame[i] - mean;
  auto r = [&](int l) {
    double a = 0, e1 = 0, e2 = 0;
    for (int i = 0; i + l < n; ++i) {
      a += x[i] * x[i + l];
      e1 += x[i] * x[i];
      e2 += x[i + l] * x[i + l];
    }
    return a / std::sqrt(e1 * e2);
  };
  double best = -1;
  for (int l = 32; l <= 320; ++l) best = std::max(best, r(l));
  for (int l = 32; l <= 320; ++l) {
    if (r(l) >= r(l - 1) && r(l) >= r(l + 1) && r(l) >= 0.9 * best) {
      double a = r(l - 1), b = r(l), c = r(l + 1);
      double shift = 0.5 * (a - c) / (a - 2 * b + c);
      return kSr / (l + shift);
    }
  }
  return 0;
}

// Direct evaluation of the MFCC chain with an O(N^2) DFT.
std::array<double, 12> OracleMfcc(const std::vector<double> &frame) {
  const int n = 400, nfft = 512, m = 26;
  std::vector<double> y(nfft, 0.0);
  for (int i = 0; i < n; ++i) {
    double prev = i == 0 ? frame[0] : frame[i - 1];
    double w = 0.54 - 0.46 * std::cos(2 * M_PI * i / (n - 1));
    y[i] = (frame[i] - 0.97 * prev) * w;
  }
  std::vector<double> power(nfft / 2 + 1);
  for (int k = 0; k <= nfft / 2; ++k) {
    std::complex<double> acc = 0;
    for (int i = 0; i < n; ++i) acc += y[i] * std::polar(1.0, -2 * M_PI * k * i / nfft);
    power[k] = std::norm(acc);
  }
  auto mel = [](double hz) { return 2595 * std::log10(1 + hz / 700); };
  auto hz = [](double mm) { return 700 * (std::pow(10, mm / 2595) - 1); };
  std::vector<double> edge(m + 2);
  for (int i = 0; i < m + 2; ++i) edge[i] = hz(mel(8000) * i / (m + 1));
  std::vector<double> lm(m);
  for (int f = 0; f < m; ++f) {
    double e = 0;
    for (int k = 0; k <= nfft / 2; ++k) {
      double fk = k * 16000.0 / nfft;
      double w = 0;
      if (fk > edge[f] && fk <= edge[f + 1])
        w = (fk - edge[f]) / (edge[f + 1] - edge[f]);
      else if (fk > edge[f + 1] && fk < edge[f + 2])
        w = (edge[f + 2] - fk) / (edge[f + 2] - edge[f + 1]);
      e += w * power[k];
    }
    lm[f] = std::log(std::max(e, 1e-10));
  }
  std::array<double, 12> c{};
  for (int q = 1; q <= 12; ++q)
    for (int j = 0; j < m; ++j)
      c[q - 1] += std::sqrt(2.0 / m) * std::cos(M_PI * q * (j + 0.5) / m) * lm[j];
  return c;
}

}  // namespace

TEST_CASE("column layout") {
  const auto &names = FeatureColumnNames();
  CHECK(names.size() == 32);
  CHECK(names[0] == "f0");
  CHECK(names[15] == "mfcc12");
  CHECK(names[16] == "d_f0");
  CHECK(names[31] == "d_mfcc12");
  FeatureConfig cfg;
  CHECK(cfg.WindowSamples(kSr) == 400);
  CHECK(cfg.HopSamples(kSr) == 160);
}

TEST_CASE("frame count has no tail padding") {
  FeatureConfig cfg;
  std::vector<double> x(16000, 0.1);
  auto frames = FrameSignal(x, kSr, cfg);
  CHECK(frames.size() == (16000 - 400) / 160 + 1);
  CHECK(frames[0].size() == 400);
  std::vector<double> short_x(399);
  CHECK_THROWS_AS(FrameSignal(short_x, kSr, cfg), Error);
  auto m = ExtractFeatures(x, kSr, cfg);
  CHECK(m.frames() == 98);
  CHECK(m.data.cols() == 32);
}

TEST_CASE("pitch of a 100 Hz sine") {
  FeatureConfig cfg;
  std::vector<double> x(400);
  for (int i = 0; i < 400; ++i) x[i] = std::sin(2 * M_PI * 100.0 * i / kSr);
  auto d = FrameDescriptors(x, kSr, cfg);
  CHECK(std::abs(d[0] - 100.0) <= 2.0);
  CHECK(d[1] > 0.9);
}

TEST_CASE("pitch within 3 percent from 80 to 400 Hz and agrees with the oracle") {
  FeatureConfig cfg;
  for (double f0 : {80.0, 95.0, 120.0, 160.0, 210.0, 260.0, 330.0, 400.0}) {
    CAPTURE(f0);
    auto x = Harmonic(f0, 400);
    auto d = FrameDescriptors(x, kSr, cfg);
    CHECK(std::abs(d[0] - f0) / f0 <= 0.03);
    CHECK(d[1] > 0.8);
    CHECK(d[0] == doctest::Approx(OraclePitch(x)).epsilon(1e-9));
  }
}

TEST_CASE("noise and silence are unvoiced") {
  FeatureConfig cfg;
  std::vector<double> zero(400, 0.0);
  auto d = FrameDescriptors(zero, kSr, cfg);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 0.0);
  CHECK(d[3] == doctest::Approx(std::log(1e-10)));

  Rng rng(1);
  int voiced = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> n(400);
    for (double &v : n) v = rng.Normal();
    if (FrameDescriptors(n, kSr, cfg)[0] > 0) ++voiced;
  }
  CHECK(voiced <= 2);
}

TEST_CASE("zero crossing rate and energy") {
  FeatureConfig cfg;
  std::vector<double> alt(400);
  for (int i = 0; i < 400; ++i) alt[i] = (i % 2) ? -0.5 : 0.5;
  auto d = FrameDescriptors(alt, kSr, cfg);
  CHECK(d[2] == 1.0);
  CHECK(d[3] == doctest::Approx(std::log(400 * 0.25)));
  std::vector<double> dc(400, 0.5);
  CHECK(FrameDescriptors(dc, kSr, cfg)[2] == 0.0);
}

TEST_CASE("mfcc matches a direct dft evaluation") {
  FeatureConfig cfg;
  Rng rng(21);
  for (int t = 0; t < 5; ++t) {
    auto x = Harmonic(90.0 + 60 * t, 400, 6, rng.Uniform(0, 3));
    for (double &v : x) v += 0.05 * rng.Normal();
    auto d = FrameDescriptors(x, kSr, cfg);
    auto ref = OracleMfcc(x);
    for (int c = 0; c < 12; ++c) CHECK(d[4 + c] == doctest::Approx(ref[c]).epsilon(1e-9));
  }
}

TEST_CASE("deltas of a ramp and of a constant") {
  FeatureConfig cfg;
  RowMatrix ramp(10, 2);
  for (int t = 0; t < 10; ++t) {
    ramp(t, 0) = 3.0 * t;
    ramp(t, 1) = 7.0;
  }
  RowMatrix d = ComputeDeltas(ramp, cfg);
  for (int t = 2; t < 8; ++t) CHECK(d(t, 0) == doctest::Approx(3.0));
  // Edge replication: at t = 0 the terms are 1*(3-0) + 2*(6-0) over 10.
  CHECK(d(0, 0) == doctest::Approx(15.0 / 10.0 * 1.0));
  CHECK(d(9, 0) == doctest::Approx(15.0 / 10.0));
  for (int t = 0; t < 10; ++t) CHECK(d(t, 1) == 0.0);
}

TEST_CASE("extraction is gain invariant and float representable") {
  FeatureConfig cfg;
  auto x = Harmonic(150.0, 4000);
  Rng rng(2);
  for (double &v : x) v += 0.01 * rng.Normal();
  auto a = ExtractFeatures(x, kSr, cfg);
  std::vector<double> y(x);
  for (double &v : y) v *= 0.25;  // power of two keeps every product exact
  auto b = ExtractFeatures(y, kSr, cfg);
  CHECK(a == b);
  for (int64_t r = 0; r < a.data.rows(); ++r)
    for (int c = 0; c < 32; ++c)
      CHECK(a.data(r, c) == static_cast<double>(static_cast<float>(a.data(r, c))));
}

TEST_CASE("feature files round trip exactly") {
  testing::TempDir dir;
  FeatureConfig cfg;
  auto x = Harmonic(200.0, 3200);
  auto m = ExtractFeatures(x, kSr, cfg);
  WriteFeatureFile(dir / "f.pmtl", m);
  CHECK(ReadFeatureFile(dir / "f.pmtl") == m);
  WriteFeatureCsv(dir / "f.csv", m);
  auto csv = testing::ReadBytes(dir / "f.csv");
  CHECK(csv.rfind("frame,f0,voice_prob", 0) == 0);

  testing::WriteText(dir / "bad.pmtl", "PMTL2xxxxxxxx");
  CHECK_THROWS_AS(ReadFeatureFile(dir / "bad.pmtl"), Error);
  auto bytes = testing::ReadBytes(dir / "f.pmtl");
  testing::WriteText(dir / "trunc.pmtl", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(ReadFeatureFile(dir / "trunc.pmtl"), Error);
}

TEST_CASE("standardizer uses population statistics") {
  FrameFeatureMatrix a, b;
  a.data = RowMatrix::Zero(2, 32);
  b.data = RowMatrix::Zero(2, 32);
  a.data(0, 0) = 1;
  a.data(1, 0) = 2;
  b.data(0, 0) = 3;
  b.data(1, 0) = 4;
  std::vector<FrameFeatureMatrix> train = {a, b};
  auto s = Standardizer::Fit(std::span<const FrameFeatureMatrix>(train));
  CHECK(s.mean()[0] == doctest::Approx(2.5));
  CHECK(s.stddev()[0] == doctest::Approx(std::sqrt(1.25)));
  auto z = s.Apply(a.data);
  CHECK(z(0, 0) == doctest::Approx(-1.5 / std::sqrt(1.25)));
  CHECK(z(0, 1) == 0.0);  // constant column
  Standardizer empty;
  CHECK_THROWS_AS(empty.Apply(a.data), Error);
}

TEST_CASE("feature config validation") {
  FeatureConfig cfg;
  cfg.fft_size = 256;
  CHECK_THROWS_AS(cfg.Validate(kSr), Error);
  cfg = {};
  cfg.n_mfcc = 13;
  CHECK_THROWS_AS(cfg.Validate(kSr), Error);
  cfg = {};
  cfg.f0_max_hz = 9000;
  CHECK_THROWS_AS(cfg.Validate(kSr), Error);
}
