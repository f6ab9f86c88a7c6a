// tests/test_common.cc

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
#include <set>
#include <sstream>

#include "common.h"
#include "test_util.h"
#include "wav.h"

using namespace pmtl;

TEST_CASE("derived seeds depend on tag and index only") {
  CHECK(DeriveSeed(1, "fold", 0) == DeriveSeed(1, "fold", 0));
  CHECK(DeriveSeed(1, "fold", 0) != DeriveSeed(1, "fold", 1));
  CHECK(DeriveSeed(1, "fold", 0) != DeriveSeed(2, "fold", 0));
  CHECK(DeriveSeed(1, "fold", 0) != DeriveSeed(1, "init", 0));
  std::set<uint64_t> seen;
  for (uint64_t i = 0; i < 1000; ++i) seen.insert(DeriveSeed(42, "x", i));
  CHECK(seen.size() == 1000);
}

TEST_CASE("rng streams are reproducible") {
  Rng a(9), b(9);
  for (int i = 0; i < 100; ++i) CHECK(a.NextU64() == b.NextU64());
}

TEST_CASE("rng uniform and normal moments") {
  Rng rng(123);
  const int n = 200000;
  double s = 0, s2 = 0, u = 0;
  for (int i = 0; i < n; ++i) {
    double z = rng.Normal();
    s += z;
    s2 += z * z;
    double v = rng.Uniform();
    CHECK_UNARY(v >= 0.0);
    CHECK_UNARY(v < 1.0);
    u += v;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(u / n - 0.5) < 0.005);
}

TEST_CASE("below is uniform over small ranges") {
  Rng rng(5);
  int counts[7] = {};
  for (int i = 0; i < 70000; ++i) ++counts[rng.Below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(3);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.Shuffle(v);
  std::set<int> s(v.begin(), v.end());
  CHECK(s.size() == 50);
  CHECK(*s.begin() == 0);
  CHECK(*s.rbegin() == 49);
}

TEST_CASE("binary helpers round-trip and detect truncation") {
  std::stringstream ss;
  WriteU32(ss, 0xdeadbeef);
  WriteF32(ss, 1.5f);
  CHECK(ReadU32(ss) == 0xdeadbeefu);
  CHECK(ReadF32(ss) == 1.5f);
  try {
    ReadU32(ss);
    FAIL("expected a parse error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kParse);
  }
}

TEST_CASE("csv splitting handles quotes") {
  auto f = SplitCsvLine("a,\"b,c\",\"d\"\"e\",");
  REQUIRE(f.size() == 4);
  CHECK(f[0] == "a");
  CHECK(f[1] == "b,c");
  CHECK(f[2] == "d\"e");
  CHECK(f[3] == "");
}

TEST_CASE("wav round trip is exact on the pcm16 grid") {
  testing::TempDir dir;
  Waveform w;
  for (int i = -300; i < 300; ++i) w.samples.push_back(i / 32768.0);
  w.samples.push_back(2.0);  // clipped
  WriteWav(dir / "a.wav", w);
  Waveform r = ReadWav(dir / "a.wav");
  CHECK(r.sample_rate == 16000);
  REQUIRE(r.samples.size() == w.samples.size());
  for (size_t i = 0; i + 1 < w.samples.size(); ++i) CHECK(r.samples[i] == w.samples[i]);
  CHECK(r.samples.back() == doctest::Approx(32767.0 / 32768.0));
}

TEST_CASE("wav reader rejects garbage") {
  testing::TempDir dir;
  testing::WriteText(dir / "bad.wav", "RIFX0000WAVE");
  CHECK_THROWS_AS(ReadWav(dir / "bad.wav"), Error);
  try {
    ReadWav(dir / "missing.wav");
    FAIL("expected an io error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}
