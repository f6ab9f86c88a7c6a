// tests/test_metrics.cc

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

#include "common.h"
#include "metrics.h"

using namespace pmtl;

namespace {

// Two-sided p-value by enumerating all 2^n sign assignments of the average
// ranks of |d|.
double EnumerationP(const std::vector<double> &d) {
  std::vector<double> nz;
  for (double x : d)
    if (x != 0) nz.push_back(x);
  const int n = static_cast<int>(nz.size());
  std::vector<double> rank(n);
  for (int i = 0; i < n; ++i) {
    int less = 0, equal = 0;
    for (int j = 0; j < n; ++j) {
      if (std::abs(nz[j]) < std::abs(nz[i])) ++less;
      if (std::abs(nz[j]) == std::abs(nz[i])) ++equal;
    }
    rank[i] = less + (equal + 1) / 2.0;
  }
  double observed = 0;
  for (int i = 0; i < n; ++i)
    if (nz[i] > 0) observed += rank[i];
  uint64_t lo = 0, hi = 0;
  const uint64_t total = uint64_t{1} << n;
  for (uint64_t mask = 0; mask < total; ++mask) {
    double w = 0;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) w += rank[i];
    if (w <= observed) ++lo;
    if (w >= observed) ++hi;
  }
  return std::min(1.0, 2.0 * static_cast<double>(std::min(lo, hi)) / static_cast<double>(total));
}

ConfusionMatrix FromRows(const double rows[4][4], double scale) {
  ConfusionMatrix cm;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) cm.counts[r][c] = std::llround(rows[r][c] * scale);
  return cm;
}

}  // namespace

TEST_CASE("unweighted accuracy basics") {
  std::vector<int> truth = {0, 0, 0, 0, 1, 2, 3, 3};
  std::vector<int> pred = {0, 0, 0, 1, 1, 0, 3, 2};
  auto cm = MakeConfusionMatrix(pred, truth);
  CHECK(cm.Total() == 8);
  CHECK(cm.Recall(0) == 0.75);
  CHECK(UnweightedAccuracy(cm) == doctest::Approx((0.75 + 1 + 0 + 0.5) / 4));

  ConfusionMatrix absent;
  absent.counts[0][0] = 3;
  absent.counts[1][0] = 1;
  CHECK(absent.Recall(2) == -1.0);
  CHECK(UnweightedAccuracy(absent) == 0.5);
  CHECK_THROWS_AS(UnweightedAccuracy(ConfusionMatrix{}), Error);
  std::vector<int> bad = {4};
  std::vector<int> one = {0};
  CHECK_THROWS_AS(MakeConfusionMatrix(bad, one), Error);
}

TEST_CASE("recomputed UAs of the four published confusion matrices") {
  const double a[4][4] = {{.99, .00, .01, .01}, {.94, .01, .01, .04},
                          {.78, .00, .18, .04}, {.73, .00, .00, .26}};
  const double b[4][4] = {{.94, .00, .04, .02}, {.80, .02, .06, .12},
                          {.16, .01, .70, .14}, {.44, .02, .06, .47}};
  const double c[4][4] = {{.90, .03, .03, .05}, {.64, .12, .08, .16},
                          {.26, .03, .65, .07}, {.35, .03, .03, .60}};
  const double d[4][4] = {{.91, .01, .04, .04}, {.64, .15, .10, .10},
                          {.09, .03, .84, .04}, {.29, .06, .05, .61}};
  const double reported[4] = {.359, .534, .565, .628};
  const double (*mats[4])[4] = {a, b, c, d};
  for (int i = 0; i < 4; ++i) {
    CAPTURE(i);
    double ua = UnweightedAccuracy(FromRows(mats[i], 100));
    CHECK(std::abs(ua - reported[i]) <= 0.003);
  }
}

TEST_CASE("wilcoxon on one through five") {
  std::vector<double> d = {1, 2, 3, 4, 5};
  auto r = WilcoxonSignedRank(d);
  CHECK(r.p_value == 0.0625);
  CHECK(r.w_plus == 15);
  CHECK(r.w_minus == 0);
  CHECK(r.exact);
  CHECK_FALSE(r.significant);
  std::vector<double> neg = {-1, -2, -3, -4, -5};
  CHECK(WilcoxonSignedRank(neg).p_value == 0.0625);
}

TEST_CASE("exact p-values match sign enumeration for n up to 12") {
  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    int n = 1 + t % 12;
    std::vector<double> d(n);
    for (double &x : d) {
      // Coarse grid so ties and zeros occur.
      x = std::round(rng.Normal() * 3) / 2 + (rng.Uniform() < 0.5 ? 0.0 : 0.25);
    }
    d[0] = d[0] == 0 ? 1.0 : d[0];
    CAPTURE(t);
    CHECK(WilcoxonSignedRank(d).p_value == EnumerationP(d));
  }
}

TEST_CASE("zeros are dropped and ties share ranks") {
  std::vector<double> d = {0, 0, 1, -1, 2, 2, 2};
  auto r = WilcoxonSignedRank(d);
  CHECK(r.n == 5);
  CHECK(r.w_plus == 1.5 + 4 * 3);
  CHECK(r.w_minus == 1.5);
  CHECK(r.p_value == EnumerationP(d));
  std::vector<double> zeros = {0, 0, 0};
  CHECK_THROWS_AS(WilcoxonSignedRank(zeros), Error);
}

TEST_CASE("large samples use the normal approximation") {
  Rng rng(4);
  std::vector<double> d(40);
  for (double &x : d) x = rng.Normal() + 0.6;
  auto r = WilcoxonSignedRank(d);
  CHECK_FALSE(r.exact);
  CHECK(r.p_value == WilcoxonNormalP(d));
  CHECK(r.significant);
  // At n = 20 the two paths roughly agree.
  std::vector<double> e(d.begin(), d.begin() + 20);
  CHECK(std::abs(WilcoxonSignedRank(e).p_value - WilcoxonNormalP(e)) < 0.02);
}

TEST_CASE("paired form equals the difference form") {
  std::vector<double> a = {0.5, 0.6, 0.7, 0.8}, b = {0.4, 0.65, 0.5, 0.5};
  std::vector<double> d = {0.5 - 0.4, 0.6 - 0.65, 0.7 - 0.5, 0.8 - 0.5};
  CHECK(WilcoxonSignedRank(a, b).p_value == WilcoxonSignedRank(d).p_value);
  std::vector<double> shorter = {1};
  CHECK_THROWS_AS(WilcoxonSignedRank(a, shorter), Error);
}
