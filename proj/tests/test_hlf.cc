// tests/test_hlf.cc

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

#include <algorithm>
#include <cmath>

#include "hlf.h"
#include "test_util.h"

using namespace pmtl;
using nn::Matrix;

namespace {

Matrix RandomPosteriors(int n, Rng *rng) {
  Matrix z(n, 4);
  for (int64_t i = 0; i < z.size(); ++i) z.data()[i] = 2 * rng->Normal();
  return nn::Softmax(z);
}

}  // namespace

TEST_CASE("sixteen functionals on a hand example") {
  Matrix p(3, 4);
  p << 0.7, 0.1, 0.1, 0.1,
       0.1, 0.6, 0.2, 0.1,
       0.25, 0.25, 0.25, 0.25;
  auto h = ComputeHlf(p, 0.2);
  REQUIRE(h.values.size() == 16);
  const double expect[16] = {0.1, 0.7, 1.05 / 3, 2.0 / 3,   //
                             0.1, 0.6, 0.95 / 3, 2.0 / 3,  //
                             0.1, 0.25, 0.55 / 3, 1.0 / 3, //
                             0.1, 0.25, 0.45 / 3, 1.0 / 3};
  for (int i = 0; i < 16; ++i) CHECK(h.values[i] == doctest::Approx(expect[i]));
  CHECK(HlfColumnNames()[0] == "neutral_min");
  CHECK(HlfColumnNames()[15] == "angry_frac");
}

TEST_CASE("functional invariants on random posteriors") {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    Matrix p = RandomPosteriors(1 + static_cast<int>(rng.Below(200)), &rng);
    double theta = rng.Uniform(0.05, 0.95);
    auto h = ComputeHlf(p, theta);
    double mean_sum = 0;
    for (int k = 0; k < 4; ++k) {
      double mn = h.values[4 * k], mx = h.values[4 * k + 1], mean = h.values[4 * k + 2],
             frac = h.values[4 * k + 3];
      CHECK(mn <= mean);
      CHECK(mean <= mx);
      CHECK(frac >= 0.0);
      CHECK(frac <= 1.0);
      CHECK(mn >= 0.0);
      CHECK(mx <= 1.0);
      mean_sum += mean;
    }
    CHECK(mean_sum == doctest::Approx(1.0));
  }
}

TEST_CASE("functionals ignore frame order") {
  Rng rng(2);
  Matrix p = RandomPosteriors(40, &rng);
  std::vector<int> order(40);
  for (int i = 0; i < 40; ++i) order[i] = i;
  rng.Shuffle(order);
  Matrix q(40, 4);
  for (int i = 0; i < 40; ++i) q.row(i) = p.row(order[i]);
  auto a = ComputeHlf(p), b = ComputeHlf(q);
  for (int i = 0; i < 16; ++i) {
    if (i % 4 == 2)
      CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-14));
    else
      CHECK(a.values[i] == b.values[i]);
  }
}

TEST_CASE("frac counts strictly above theta") {
  Matrix p(2, 4);
  p << 0.2, 0.3, 0.3, 0.2,
       0.5, 0.1, 0.2, 0.2;
  auto h = ComputeHlf(p, 0.2);
  CHECK(h.values[3] == 0.5);
  CHECK(h.values[15] == 0.0);
}

TEST_CASE("invalid posteriors are rejected") {
  Matrix bad(1, 4);
  bad << 0.5, 0.5, 0.5, 0.5;
  CHECK_THROWS_AS(ComputeHlf(bad), Error);
  Matrix wide(1, 5);
  wide.setConstant(0.2);
  CHECK_THROWS_AS(ComputeHlf(wide), Error);
  Matrix ok(1, 4);
  ok.setConstant(0.25);
  CHECK_THROWS_AS(ComputeHlf(ok, 1.0), Error);
  CHECK_THROWS_AS(ComputeHlf(Matrix(0, 4)), Error);
}

TEST_CASE("hlf csv round trip is exact") {
  testing::TempDir dir;
  Rng rng(3);
  std::vector<HlfRow> rows;
  for (int i = 0; i < 5; ++i) {
    HlfRow r;
    r.utterance_id = "u" + std::to_string(i);
    r.hlf = ComputeHlf(RandomPosteriors(30, &rng));
    r.emotion = static_cast<Emotion>(i % 4);
    r.gender = static_cast<Gender>(i % 4);
    r.naturalness = static_cast<Naturalness>(i % 2);
    r.speaker_id = "s" + std::to_string(i);
    r.corpus_id = "c";
    r.partition = i < 3 ? "train" : "test";
    rows.push_back(r);
  }
  WriteHlfCsv(dir / "h.csv", rows);
  auto back = ReadHlfCsv(dir / "h.csv");
  REQUIRE(back.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].utterance_id == rows[i].utterance_id);
    CHECK(back[i].hlf.values == rows[i].hlf.values);
    CHECK(back[i].emotion == rows[i].emotion);
    CHECK(back[i].gender == rows[i].gender);
    CHECK(back[i].partition == rows[i].partition);
  }
  testing::WriteText(dir / "bad.csv", "utterance_id,x\nu,1\n");
  CHECK_THROWS_AS(ReadHlfCsv(dir / "bad.csv"), Error);
}
