// src/embed.h

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

#ifndef PMTL_EMBED_H_
#define PMTL_EMBED_H_

#include <filesystem>
#include <string>
#include <vector>

#include "nn.h"

namespace pmtl {

struct TsneConfig {
  double perplexity = 30.0;
  int n_iter = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iters = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iter = 250;
  int out_dims = 2;
  uint64_t seed = 0;

  void Validate(int64_t n_points) const;
};

struct Affinities {
  nn::Matrix conditional;  // row i: p_{j|i}, each row sums to 1
  nn::Matrix joint;        // (P_cond + P_cond^T) / 2n
  std::vector<double> row_perplexity;
  std::vector<double> beta;  // 1 / (2 sigma_i^2)
};

/// Per-row bisection on the Gaussian precision until each conditional
/// distribution's perplexity is within 1e-4 of the target (at most 50
/// steps).
Affinities ComputeAffinities(const nn::Matrix &x, double perplexity);

/// Student-t similarities q_ij (zero diagonal, summing to 1).
nn::Matrix TsneQ(const nn::Matrix &y);
/// KL(P || Q) for a joint P.
double TsneKl(const nn::Matrix &p, const nn::Matrix &y);
/// dKL/dY = 4 sum_j (p_ij - q_ij)(y_i - y_j)(1 + |y_i - y_j|^2)^-1.
nn::Matrix TsneGradient(const nn::Matrix &p, const nn::Matrix &y);

struct TsneResult {
  nn::Matrix embedding;         // n x out_dims
  std::vector<double> kl_trace;  // KL(P || Q) after each iteration, unexaggerated P
};

/// Momentum descent with adaptive gains and early exaggeration. After the
/// exaggeration phase KL never increases from one iteration to the next.
TsneResult TsneEmbed(const nn::Matrix &x, const TsneConfig &config);

struct EmbeddingRow {
  std::string utterance_id;
  std::string emotion, gender, naturalness, corpus_id;
};

/// CSV: utterance_id,x,y,emotion,gender,naturalness,corpus_id (3-D adds z
/// after y).
void WriteEmbeddingCsv(const std::filesystem::path &path, const nn::Matrix &embedding,
                       const std::vector<EmbeddingRow> &rows);
/// Static scatter plot coloured by emotion.
void WriteEmbeddingSvg(const std::filesystem::path &path, const nn::Matrix &embedding,
                       const std::vector<EmbeddingRow> &rows);

}  // namespace pmtl

#endif  // PMTL_EMBED_H_
