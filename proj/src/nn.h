// src/nn.h

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

#ifndef PMTL_NN_H_
#define PMTL_NN_H_

// A small trainable core: dense and LSTM layers with exact backward passes,
// softmax cross-entropy, inverted dropout, Adam, and a central-difference
// gradient checker. Everything is double precision; batches are row-major
// with one example (or one time step of one sequence) per row.

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "common.h"

namespace pmtl::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  void ZeroGrad() { grad.setZero(value.rows(), value.cols()); }
};

enum class Activation { kRelu, kSigmoid, kLinear };

const char *ToString(Activation a);
Activation ParseActivation(const std::string &s);

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Matrix GlorotUniform(int rows, int cols, int fan_in, int fan_out, Rng *rng);

class Dense {
 public:
  Dense() = default;
  Dense(std::string name, int in, int out, Activation act, Rng *rng);

  int in() const { return static_cast<int>(w_.value.cols()); }
  int out() const { return static_cast<int>(w_.value.rows()); }
  Activation activation() const { return act_; }

  /// Y = act(X W^T + b). Caches what Backward needs.
  Matrix Forward(const Matrix &x);
  /// Inference path; touches no state.
  Matrix Apply(const Matrix &x) const;
  /// Accumulates into the parameter gradients and returns dL/dX.
  Matrix Backward(const Matrix &dy);

  Param &weight() { return w_; }
  Param &bias() { return b_; }
  const Param &weight() const { return w_; }
  const Param &bias() const { return b_; }
  std::vector<Param *> params() { return {&w_, &b_}; }

 private:
  Param w_;  // out x in
  Param b_;  // 1 x out
  Activation act_ = Activation::kLinear;
  Matrix x_cache_, y_cache_;
};

/// Time-major sequence batch: row t * batch + b holds step t of sequence b.
struct SequenceBatch {
  int steps = 0;
  int batch = 0;
  Matrix data;  // (steps * batch) x dim

  auto Step(int t) { return data.middleRows(static_cast<int64_t>(t) * batch, batch); }
  auto Step(int t) const {
    return data.middleRows(static_cast<int64_t>(t) * batch, batch);
  }
};

/// Gate layout along the 4H axis is [input, forget, output, cell].
class Lstm {
 public:
  Lstm() = default;
  Lstm(std::string name, int in, int hidden, Rng *rng);

  int in() const { return static_cast<int>(wx_.value.cols()); }
  int hidden() const { return hidden_; }

  /// Zero initial state. Returns hidden states with the same layout.
  SequenceBatch Forward(const SequenceBatch &x);
  SequenceBatch Apply(const SequenceBatch &x) const;
  /// Backpropagation through time; returns dL/dX.
  SequenceBatch Backward(const SequenceBatch &dh);

  /// Gate activations of the last Forward, (steps*batch) x 4H, post-nonlinearity.
  const Matrix &gates() const { return gates_; }

  Param &input_weight() { return wx_; }
  Param &recurrent_weight() { return wh_; }
  Param &bias() { return b_; }
  std::vector<Param *> params() { return {&wx_, &wh_, &b_}; }

 private:
  SequenceBatch Run(const SequenceBatch &x, Matrix *gates, Matrix *cells,
                    Matrix *hidden) const;

  int hidden_ = 0;
  Param wx_;  // 4H x in
  Param wh_;  // 4H x H
  Param b_;   // 1 x 4H
  SequenceBatch x_cache_;
  Matrix gates_, cells_, hiddens_;
};

struct XentResult {
  double loss = 0.0;  // weighted mean over rows
  Matrix probs;
  Matrix grad;  // dloss/dlogits
};

/// Row-wise softmax with max subtraction.
Matrix Softmax(const Matrix &logits);

/// `targets` must be one-hot; grad = (probs - targets) / batch.
XentResult SoftmaxXent(const Matrix &logits, const Matrix &targets);

/// Label form with optional per-row weights (0 masks a row out). The loss is
/// sum_r w_r * ce_r / sum_r w_r.
XentResult SoftmaxXent(const Matrix &logits, std::span<const int> labels,
                       std::span<const double> weights = {});

struct DropoutSpec {
  enum class Mode { kTrain, kEval };
  double p = 0.5;
  Mode mode = Mode::kTrain;
};

/// Inverted dropout. Writes the scaled keep-mask to `mask` (ones in eval
/// mode) so that the backward pass is `grad.cwiseProduct(mask)`.
Matrix Dropout(const Matrix &x, const DropoutSpec &spec, Rng *rng, Matrix *mask = nullptr);

struct AdamState {
  double lr = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t t = 0;
  std::vector<Matrix> m, v;
};

/// Bias-corrected Adam on each param's `grad`. Throws on non-finite grads
/// before touching anything.
void AdamStep(AdamState *state, std::span<Param *const> params);

/// Scales all grads so their joint L2 norm is at most `max_norm`; returns
/// the norm before clipping.
double ClipGlobalNorm(std::span<Param *const> params, double max_norm);

struct GradCheckReport {
  double max_rel_error = 0.0;
  int64_t checked = 0;
  std::string worst;  // "<param>[row,col]"
};

/// Compares analytic gradients with central differences on a seeded subset
/// of entries (`per_param` per tensor, or all entries when the tensor is
/// smaller). `forward_backward` must zero and fill grads and return the
/// loss; `forward` returns the loss only. Relative error is
/// |a - n| / max(|a| + |n|, 1e-6).
GradCheckReport GradCheck(std::span<Param *const> params,
                          const std::function<double()> &forward_backward,
                          const std::function<double()> &forward, int per_param,
                          uint64_t seed, double h = 1e-5);

// Checkpoint container: "PMTLCKP1", u32 header length, JSON header bytes,
// then every tensor in order as float32 little-endian, row-major. The header
// lists tensor names and shapes under "tensors".
struct CheckpointTensor {
  std::string name;
  Matrix value;
};

void WriteCheckpoint(const std::filesystem::path &path, const std::string &header_json,
                     std::span<const CheckpointTensor> tensors);
/// Returns the header JSON text; tensors are filled in file order.
std::string ReadCheckpoint(const std::filesystem::path &path,
                           std::vector<CheckpointTensor> *tensors);

}  // namespace pmtl::nn

#endif  // PMTL_NN_H_
