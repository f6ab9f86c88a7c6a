// src/elm.h

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

#ifndef PMTL_ELM_H_
#define PMTL_ELM_H_

#include <filesystem>
#include <span>
#include <vector>

#include "nn.h"

namespace pmtl {

struct ElmConfig {
  int n_hidden = 120;
  double ridge = 1e-3;
  uint64_t seed = 0;

  void Validate() const;
};

/// Extreme learning machine: frozen random sigmoid layer, ridge-regressed
/// linear read-out.
struct ElmModel {
  ElmConfig config;
  nn::Matrix input_weight;   // n_hidden x d
  nn::Matrix input_bias;     // 1 x n_hidden
  nn::Matrix output_weight;  // k x n_hidden

  /// sigmoid(X A^T + bias)
  nn::Matrix Hidden(const nn::Matrix &x) const;
};

/// Draws the hidden layer from config.seed (independent of the data).
ElmModel ElmInit(int input_dim, const ElmConfig &config);

/// Solves (H^T H + ridge I) B^T = H^T Y by Cholesky. `targets` is one-hot.
ElmModel ElmFit(const nn::Matrix &x, const nn::Matrix &targets, const ElmConfig &config);

struct ElmPrediction {
  nn::Matrix scores;
  std::vector<int> labels;  // argmax, ties to the lowest index
};

ElmPrediction ElmPredict(const ElmModel &model, const nn::Matrix &x);

/// Row-wise argmax; ties go to the lowest column.
std::vector<int> ArgmaxRows(const nn::Matrix &scores);

void SaveElm(const ElmModel &model, const std::filesystem::path &path);
ElmModel LoadElm(const std::filesystem::path &path);

}  // namespace pmtl

#endif  // PMTL_ELM_H_
