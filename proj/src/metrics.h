// src/metrics.h

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

#ifndef PMTL_METRICS_H_
#define PMTL_METRICS_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "corpus.h"

namespace pmtl {

/// Rows are true classes, columns predictions.
struct ConfusionMatrix {
  std::array<std::array<int64_t, kNumEmotions>, kNumEmotions> counts{};

  int64_t RowSum(int r) const;
  int64_t Total() const;
  /// Recall of class r, or -1 when the class is absent from the truth.
  double Recall(int r) const;
  bool operator==(const ConfusionMatrix &) const = default;
};

ConfusionMatrix MakeConfusionMatrix(std::span<const int> predicted, std::span<const int> truth);

/// Mean recall over the classes present in the truth. Throws on an all-zero
/// matrix.
double UnweightedAccuracy(const ConfusionMatrix &cm);

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  int n = 0;  // non-zero differences used
  double p_value = 1.0;
  bool significant = false;
  bool exact = true;
};

/// Largest sample size that still gets the exact null distribution.
inline constexpr int kWilcoxonExactMax = 20;

/// Two-sided paired signed-rank test on a - b. Zero differences are dropped
/// and tied magnitudes share the average rank. Exact for n <= 20, otherwise
/// normal approximation with continuity and tie corrections. Throws when
/// every difference is zero.
WilcoxonResult WilcoxonSignedRank(std::span<const double> a, std::span<const double> b,
                                  double alpha = 0.05);

/// Same test on differences directly.
WilcoxonResult WilcoxonSignedRank(std::span<const double> differences, double alpha = 0.05);

/// Normal-approximation p-value regardless of n (exposed for comparison).
double WilcoxonNormalP(std::span<const double> differences);

}  // namespace pmtl

#endif  // PMTL_METRICS_H_
