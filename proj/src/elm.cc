// src/elm.cc

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

#include "elm.h"

#include <json.hpp>

#include "common.h"

namespace pmtl {

using nn::Matrix;

void ElmConfig::Validate() const {
  if (n_hidden < 1) Fail(ErrorCode::kInvalidArgument, "ELM needs n_hidden >= 1");
  if (!(ridge >= 0)) Fail(ErrorCode::kInvalidArgument, "ELM ridge must be >= 0");
}

Matrix ElmModel::Hidden(const Matrix &x) const {
  if (x.cols() != input_weight.cols())
    Fail(ErrorCode::kInvalidArgument, "ELM input width " + std::to_string(x.cols()) +
                                          " != " + std::to_string(input_weight.cols()));
  Matrix z = x * input_weight.transpose();
  z.rowwise() += input_bias.row(0);
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

ElmModel ElmInit(int input_dim, const ElmConfig &config) {
  config.Validate();
  ElmModel m;
  m.config = config;
  Rng rng(DeriveSeed(config.seed, "elm-hidden"));
  // Drawn on the float grid so a checkpoint reproduces the hidden layer exactly.
  auto draw = [&rng] { return static_cast<double>(static_cast<float>(rng.Uniform(-1.0, 1.0))); };
  m.input_weight.resize(config.n_hidden, input_dim);
  for (int64_t i = 0; i < m.input_weight.size(); ++i) m.input_weight.data()[i] = draw();
  m.input_bias.resize(1, config.n_hidden);
  for (int64_t i = 0; i < m.input_bias.size(); ++i) m.input_bias.data()[i] = draw();
  return m;
}

ElmModel ElmFit(const Matrix &x, const Matrix &targets, const ElmConfig &config) {
  if (x.rows() != targets.rows())
    Fail(ErrorCode::kInvalidArgument, "ELM inputs and targets differ in row count");
  if (x.rows() < 1) Fail(ErrorCode::kInvalidArgument, "ELM needs training rows");
  ElmModel m = ElmInit(static_cast<int>(x.cols()), config);
  const Matrix h = m.Hidden(x);
  Eigen::MatrixXd gram = h.transpose() * h;
  gram.diagonal().array() += config.ridge;
  Eigen::MatrixXd rhs = h.transpose() * targets;
  Eigen::MatrixXd bt;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) {
    bt = llt.solve(rhs);
  } else {
    // Only reachable with ridge == 0 and a singular Gram matrix.
    bt = gram.ldlt().solve(rhs);
  }
  if (!bt.allFinite()) Fail(ErrorCode::kNumeric, "ELM output solve produced non-finite weights");
  m.output_weight = bt.transpose();
  return m;
}

std::vector<int> ArgmaxRows(const Matrix &scores) {
  std::vector<int> out(scores.rows());
  for (int64_t r = 0; r < scores.rows(); ++r) {
    int best = 0;
    for (int64_t c = 1; c < scores.cols(); ++c)
      if (scores(r, c) > scores(r, best)) best = static_cast<int>(c);
    out[r] = best;
  }
  return out;
}

ElmPrediction ElmPredict(const ElmModel &model, const Matrix &x) {
  if (model.output_weight.size() == 0) Fail(ErrorCode::kState, "ELM is not fitted");
  ElmPrediction p;
  p.scores = model.Hidden(x) * model.output_weight.transpose();
  p.labels = ArgmaxRows(p.scores);
  return p;
}

void SaveElm(const ElmModel &model, const std::filesystem::path &path) {
  nlohmann::json header = {{"format", "pmtl-elm"},
                           {"n_hidden", model.config.n_hidden},
                           {"ridge", model.config.ridge},
                           {"seed", model.config.seed},
                           {"activation", "sigmoid"}};
  std::vector<nn::CheckpointTensor> t = {{"elm.input_weight", model.input_weight},
                                         {"elm.input_bias", model.input_bias},
                                         {"elm.output_weight", model.output_weight}};
  nn::WriteCheckpoint(path, header.dump(), t);
}

ElmModel LoadElm(const std::filesystem::path &path) {
  std::vector<nn::CheckpointTensor> t;
  auto header = nlohmann::json::parse(nn::ReadCheckpoint(path, &t));
  if (header.value("format", "") != "pmtl-elm" || t.size() != 3)
    Fail(ErrorCode::kParse, path.string() + " is not an ELM checkpoint");
  ElmModel m;
  m.config.n_hidden = header.at("n_hidden").get<int>();
  m.config.ridge = header.at("ridge").get<double>();
  m.config.seed = header.at("seed").get<uint64_t>();
  m.input_weight = t[0].value;
  m.input_bias = t[1].value;
  m.output_weight = t[2].value;
  return m;
}

}  // namespace pmtl
