// src/metrics.cc

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

#include "metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common.h"

namespace pmtl {

int64_t ConfusionMatrix::RowSum(int r) const {
  return std::accumulate(counts[r].begin(), counts[r].end(), int64_t{0});
}

int64_t ConfusionMatrix::Total() const {
  int64_t t = 0;
  for (int r = 0; r < kNumEmotions; ++r) t += RowSum(r);
  return t;
}

double ConfusionMatrix::Recall(int r) const {
  int64_t s = RowSum(r);
  return s == 0 ? -1.0 : static_cast<double>(counts[r][r]) / static_cast<double>(s);
}

ConfusionMatrix MakeConfusionMatrix(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size())
    Fail(ErrorCode::kInvalidArgument, "prediction and truth lengths differ");
  ConfusionMatrix cm;
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= kNumEmotions || predicted[i] < 0 ||
        predicted[i] >= kNumEmotions)
      Fail(ErrorCode::kInvalidArgument, "label out of range");
    ++cm.counts[truth[i]][predicted[i]];
  }
  return cm;
}

double UnweightedAccuracy(const ConfusionMatrix &cm) {
  double sum = 0.0;
  int present = 0;
  for (int r = 0; r < kNumEmotions; ++r) {
    if (cm.RowSum(r) == 0) continue;
    sum += cm.Recall(r);
    ++present;
  }
  if (present == 0) Fail(ErrorCode::kInvalidArgument, "confusion matrix is empty");
  return sum / present;
}

namespace {

struct Ranked {
  std::vector<double> diffs;   // non-zero differences
  std::vector<int> twice_rank;  // 2 * average rank (always an integer)
  double tie_term = 0.0;       // sum over tie groups of t^3 - t
};

Ranked RankDifferences(std::span<const double> d) {
  Ranked out;
  for (double x : d) {
    if (!std::isfinite(x)) Fail(ErrorCode::kInvalidArgument, "non-finite paired difference");
    if (x != 0.0) out.diffs.push_back(x);
  }
  if (out.diffs.empty())
    Fail(ErrorCode::kInvalidArgument, "all differences zero: nothing to test");
  const size_t n = out.diffs.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::abs(out.diffs[a]) < std::abs(out.diffs[b]);
  });
  out.twice_rank.assign(n, 0);
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j + 1 < n && std::abs(out.diffs[order[j + 1]]) == std::abs(out.diffs[order[i]])) ++j;
    // positions i..j (0-based) share ranks i+1..j+1; twice the mean is i+j+2
    for (size_t k = i; k <= j; ++k) out.twice_rank[order[k]] = static_cast<int>(i + j + 2);
    double t = static_cast<double>(j - i + 1);
    out.tie_term += t * t * t - t;
    i = j + 1;
  }
  return out;
}

double NormalP(const Ranked &r, double w_plus) {
  const double n = static_cast<double>(r.diffs.size());
  const double mean = n * (n + 1) / 4.0;
  const double var = n * (n + 1) * (2 * n + 1) / 24.0 - r.tie_term / 48.0;
  if (!(var > 0)) return 1.0;
  double z = (std::abs(w_plus - mean) - 0.5) / std::sqrt(var);
  if (z < 0) z = 0;
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

}  // namespace

double WilcoxonNormalP(std::span<const double> differences) {
  Ranked r = RankDifferences(differences);
  double w_plus = 0.0;
  for (size_t i = 0; i < r.diffs.size(); ++i)
    if (r.diffs[i] > 0) w_plus += r.twice_rank[i] / 2.0;
  return NormalP(r, w_plus);
}

WilcoxonResult WilcoxonSignedRank(std::span<const double> d, double alpha) {
  Ranked r = RankDifferences(d);
  WilcoxonResult res;
  res.n = static_cast<int>(r.diffs.size());
  int twice_plus = 0, twice_total = 0;
  for (size_t i = 0; i < r.diffs.size(); ++i) {
    twice_total += r.twice_rank[i];
    if (r.diffs[i] > 0) twice_plus += r.twice_rank[i];
  }
  res.w_plus = twice_plus / 2.0;
  res.w_minus = (twice_total - twice_plus) / 2.0;

  if (res.n <= kWilcoxonExactMax) {
    // Null distribution of 2*W+ over all 2^n equally likely sign patterns,
    // built one rank at a time.
    std::vector<uint64_t> count(twice_total + 1, 0);
    count[0] = 1;
    int reach = 0;
    for (int tr : r.twice_rank) {
      for (int s = reach; s >= 0; --s)
        if (count[s]) count[s + tr] += count[s];
      reach += tr;
    }
    uint64_t lower = 0, upper = 0, all = 0;
    for (int s = 0; s <= twice_total; ++s) {
      all += count[s];
      if (s <= twice_plus) lower += count[s];
      if (s >= twice_plus) upper += count[s];
    }
    double tail = static_cast<double>(std::min(lower, upper)) / static_cast<double>(all);
    res.p_value = std::min(1.0, 2.0 * tail);
    res.exact = true;
  } else {
    res.p_value = NormalP(r, res.w_plus);
    res.exact = false;
  }
  res.significant = res.p_value < alpha;
  return res;
}

WilcoxonResult WilcoxonSignedRank(std::span<const double> a, std::span<const double> b,
                                  double alpha) {
  if (a.size() != b.size()) Fail(ErrorCode::kInvalidArgument, "paired samples differ in length");
  std::vector<double> d(a.size());
  for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return WilcoxonSignedRank(d, alpha);
}

}  // namespace pmtl
