// src/nn.cc

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

#include "nn.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

namespace pmtl::nn {

namespace {

Matrix Activate(const Matrix &z, Activation act) {
  switch (act) {
    case Activation::kRelu: return z.cwiseMax(0.0);
    case Activation::kSigmoid: return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    case Activation::kLinear: return z;
  }
  return z;
}

// dL/dz given dL/dy and the activated output y.
Matrix ActivationGrad(const Matrix &dy, const Matrix &y, Activation act) {
  switch (act) {
    case Activation::kRelu: return (y.array() > 0.0).select(dy, 0.0);
    case Activation::kSigmoid: return (dy.array() * y.array() * (1.0 - y.array())).matrix();
    case Activation::kLinear: return dy;
  }
  return dy;
}

inline double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

const char *ToString(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kLinear: return "linear";
  }
  return "?";
}

Activation ParseActivation(const std::string &s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "linear") return Activation::kLinear;
  Fail(ErrorCode::kParse, "unknown activation '" + s + "'");
}

Matrix GlorotUniform(int rows, int cols, int fan_in, int fan_out, Rng *rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng->Uniform(-limit, limit);
  return m;
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::string name, int in, int out, Activation act, Rng *rng) : act_(act) {
  w_.name = name + ".weight";
  w_.value = GlorotUniform(out, in, in, out, rng);
  b_.name = name + ".bias";
  b_.value = Matrix::Zero(1, out);
  w_.ZeroGrad();
  b_.ZeroGrad();
}

Matrix Dense::Apply(const Matrix &x) const {
  if (x.cols() != in())
    Fail(ErrorCode::kInvalidArgument, "dense " + w_.name + ": input width " +
                                          std::to_string(x.cols()) + " != " +
                                          std::to_string(in()));
  Matrix z = x * w_.value.transpose();
  z.rowwise() += b_.value.row(0);
  return Activate(z, act_);
}

Matrix Dense::Forward(const Matrix &x) {
  Matrix y = Apply(x);
  x_cache_ = x;
  y_cache_ = y;
  return y;
}

Matrix Dense::Backward(const Matrix &dy) {
  if (dy.rows() != y_cache_.rows() || dy.cols() != out())
    Fail(ErrorCode::kInvalidArgument, "dense backward shape mismatch");
  Matrix dz = ActivationGrad(dy, y_cache_, act_);
  w_.grad.noalias() += dz.transpose() * x_cache_;
  b_.grad += dz.colwise().sum();
  return dz * w_.value;
}

// ---------------------------------------------------------------- LSTM

Lstm::Lstm(std::string name, int in, int hidden, Rng *rng) : hidden_(hidden) {
  wx_.name = name + ".input_weight";
  wh_.name = name + ".recurrent_weight";
  b_.name = name + ".bias";
  wx_.value.resize(4 * hidden, in);
  wh_.value.resize(4 * hidden, hidden);
  // Each gate block is initialised as its own fan_in x fan_out matrix.
  for (int g = 0; g < 4; ++g) {
    wx_.value.middleRows(g * hidden, hidden) = GlorotUniform(hidden, in, in, hidden, rng);
    wh_.value.middleRows(g * hidden, hidden) =
        GlorotUniform(hidden, hidden, hidden, hidden, rng);
  }
  b_.value = Matrix::Zero(1, 4 * hidden);
  b_.value.middleCols(hidden, hidden).setOnes();  // forget gate
  wx_.ZeroGrad();
  wh_.ZeroGrad();
  b_.ZeroGrad();
}

SequenceBatch Lstm::Run(const SequenceBatch &x, Matrix *gates, Matrix *cells,
                        Matrix *hidden) const {
  if (x.steps < 1) Fail(ErrorCode::kInvalidArgument, "LSTM needs at least one time step");
  if (x.data.cols() != in())
    Fail(ErrorCode::kInvalidArgument, "LSTM " + wx_.name + ": input width mismatch");
  if (!x.data.allFinite()) Fail(ErrorCode::kNumeric, "non-finite LSTM input");
  const int H = hidden_, B = x.batch;
  // Input projections for every step in one product.
  *gates = x.data * wx_.value.transpose();
  gates->rowwise() += b_.value.row(0);
  cells->resize(x.data.rows(), H);
  hidden->resize(x.data.rows(), H);
  Matrix h_prev = Matrix::Zero(B, H), c_prev = Matrix::Zero(B, H);
  Matrix whT = wh_.value.transpose();
  for (int t = 0; t < x.steps; ++t) {
    auto z = gates->middleRows(static_cast<int64_t>(t) * B, B);
    if (t > 0) z.noalias() += h_prev * whT;
    for (int b = 0; b < B; ++b) {
      for (int j = 0; j < H; ++j) {
        double i = Sigmoid(z(b, j));
        double f = Sigmoid(z(b, H + j));
        double o = Sigmoid(z(b, 2 * H + j));
        double g = std::tanh(z(b, 3 * H + j));
        double c = f * c_prev(b, j) + i * g;
        z(b, j) = i;
        z(b, H + j) = f;
        z(b, 2 * H + j) = o;
        z(b, 3 * H + j) = g;
        (*cells)(static_cast<int64_t>(t) * B + b, j) = c;
        (*hidden)(static_cast<int64_t>(t) * B + b, j) = o * std::tanh(c);
      }
    }
    h_prev = hidden->middleRows(static_cast<int64_t>(t) * B, B);
    c_prev = cells->middleRows(static_cast<int64_t>(t) * B, B);
  }
  SequenceBatch out;
  out.steps = x.steps;
  out.batch = B;
  out.data = *hidden;
  return out;
}

SequenceBatch Lstm::Apply(const SequenceBatch &x) const {
  Matrix gates, cells, hidden;
  return Run(x, &gates, &cells, &hidden);
}

SequenceBatch Lstm::Forward(const SequenceBatch &x) {
  x_cache_ = x;
  return Run(x, &gates_, &cells_, &hiddens_);
}

SequenceBatch Lstm::Backward(const SequenceBatch &dh) {
  const int H = hidden_, B = x_cache_.batch, T = x_cache_.steps;
  if (dh.data.rows() != gates_.rows() || dh.data.cols() != H)
    Fail(ErrorCode::kInvalidArgument, "LSTM backward shape mismatch");
  Matrix dz(gates_.rows(), 4 * H);
  Matrix dh_next = Matrix::Zero(B, H), dc_next = Matrix::Zero(B, H);
  for (int t = T - 1; t >= 0; --t) {
    const int64_t row0 = static_cast<int64_t>(t) * B;
    Matrix dh_t = dh.data.middleRows(row0, B) + dh_next;
    for (int b = 0; b < B; ++b) {
      for (int j = 0; j < H; ++j) {
        const int64_t r = row0 + b;
        double i = gates_(r, j), f = gates_(r, H + j), o = gates_(r, 2 * H + j),
               g = gates_(r, 3 * H + j);
        double c = cells_(r, j);
        double c_prev = t > 0 ? cells_(r - B, j) : 0.0;
        double tc = std::tanh(c);
        double dht = dh_t(b, j);
        double dc = dht * o * (1.0 - tc * tc) + dc_next(b, j);
        dz(r, j) = dc * g * i * (1.0 - i);
        dz(r, H + j) = dc * c_prev * f * (1.0 - f);
        dz(r, 2 * H + j) = dht * tc * o * (1.0 - o);
        dz(r, 3 * H + j) = dc * i * (1.0 - g * g);
        dc_next(b, j) = dc * f;
      }
    }
    auto dz_t = dz.middleRows(row0, B);
    if (t > 0) {
      wh_.grad.noalias() += dz_t.transpose() * hiddens_.middleRows(row0 - B, B);
      dh_next.noalias() = dz_t * wh_.value;
    }
  }
  wx_.grad.noalias() += dz.transpose() * x_cache_.data;
  b_.grad += dz.colwise().sum();
  SequenceBatch dx;
  dx.steps = T;
  dx.batch = B;
  dx.data = dz * wx_.value;
  return dx;
}

// ---------------------------------------------------------------- losses

Matrix Softmax(const Matrix &logits) {
  Matrix p(logits.rows(), logits.cols());
  for (int64_t r = 0; r < logits.rows(); ++r) {
    double mx = logits.row(r).maxCoeff();
    p.row(r) = (logits.row(r).array() - mx).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

XentResult SoftmaxXent(const Matrix &logits, std::span<const int> labels,
                       std::span<const double> weights) {
  const int64_t n = logits.rows(), k = logits.cols();
  if (k < 2) Fail(ErrorCode::kInvalidArgument, "softmax needs at least two classes");
  if (static_cast<int64_t>(labels.size()) != n)
    Fail(ErrorCode::kInvalidArgument, "label count does not match logits");
  if (!weights.empty() && static_cast<int64_t>(weights.size()) != n)
    Fail(ErrorCode::kInvalidArgument, "weight count does not match logits");
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "empty batch");
  XentResult res;
  res.probs.resize(n, k);
  res.grad.resize(n, k);
  double total_w = 0.0, total = 0.0;
  for (int64_t r = 0; r < n; ++r) {
    const int y = labels[r];
    if (y < 0 || y >= k) Fail(ErrorCode::kInvalidArgument, "label out of range");
    const double w = weights.empty() ? 1.0 : weights[r];
    double mx = logits.row(r).maxCoeff();
    double sum = 0.0;
    for (int64_t c = 0; c < k; ++c) sum += std::exp(logits(r, c) - mx);
    double lse = mx + std::log(sum);
    for (int64_t c = 0; c < k; ++c) res.probs(r, c) = std::exp(logits(r, c) - lse);
    total += w * (lse - logits(r, y));
    total_w += w;
  }
  if (!(total_w > 0)) Fail(ErrorCode::kInvalidArgument, "all rows are masked out");
  res.loss = total / total_w;
  for (int64_t r = 0; r < n; ++r) {
    const double w = (weights.empty() ? 1.0 : weights[r]) / total_w;
    res.grad.row(r) = w * res.probs.row(r);
    res.grad(r, labels[r]) -= w;
  }
  return res;
}

XentResult SoftmaxXent(const Matrix &logits, const Matrix &targets) {
  if (targets.rows() != logits.rows() || targets.cols() != logits.cols())
    Fail(ErrorCode::kInvalidArgument, "targets shape does not match logits");
  std::vector<int> labels(targets.rows());
  for (int64_t r = 0; r < targets.rows(); ++r) {
    int hot = -1;
    for (int64_t c = 0; c < targets.cols(); ++c) {
      double v = targets(r, c);
      if (v == 1.0 && hot < 0) {
        hot = static_cast<int>(c);
      } else if (v != 0.0) {
        hot = -2;
        break;
      }
    }
    if (hot < 0)
      Fail(ErrorCode::kInvalidArgument, "target row " + std::to_string(r) + " is not one-hot");
    labels[r] = hot;
  }
  XentResult res = SoftmaxXent(logits, labels);
  // Same value, written in the (p - y) / batch form.
  res.grad = (res.probs - targets) / static_cast<double>(logits.rows());
  return res;
}

Matrix Dropout(const Matrix &x, const DropoutSpec &spec, Rng *rng, Matrix *mask) {
  if (!(spec.p >= 0.0 && spec.p < 1.0))
    Fail(ErrorCode::kInvalidArgument, "dropout p must lie in [0, 1)");
  if (spec.mode == DropoutSpec::Mode::kEval || spec.p == 0.0) {
    if (mask) *mask = Matrix::Ones(x.rows(), x.cols());
    return x;
  }
  const double scale = 1.0 / (1.0 - spec.p);
  Matrix m(x.rows(), x.cols());
  for (int64_t r = 0; r < x.rows(); ++r)
    for (int64_t c = 0; c < x.cols(); ++c) m(r, c) = rng->Uniform() >= spec.p ? scale : 0.0;
  Matrix y = x.cwiseProduct(m);
  if (mask) *mask = std::move(m);
  return y;
}

// ---------------------------------------------------------------- Adam

void AdamStep(AdamState *s, std::span<Param *const> params) {
  for (const Param *p : params)
    if (!p->grad.allFinite())
      Fail(ErrorCode::kNumeric, "non-finite gradient in " + p->name);
  if (s->m.size() != params.size()) {
    s->m.clear();
    s->v.clear();
    for (const Param *p : params) {
      s->m.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      s->v.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  ++s->t;
  const double c1 = 1.0 - std::pow(s->beta1, static_cast<double>(s->t));
  const double c2 = 1.0 - std::pow(s->beta2, static_cast<double>(s->t));
  for (size_t i = 0; i < params.size(); ++i) {
    Param &p = *params[i];
    if (s->m[i].rows() != p.value.rows() || s->m[i].cols() != p.value.cols())
      Fail(ErrorCode::kInvalidArgument, "Adam state does not match " + p.name);
    s->m[i] = s->beta1 * s->m[i] + (1.0 - s->beta1) * p.grad;
    s->v[i] = s->beta2 * s->v[i] + (1.0 - s->beta2) * p.grad.cwiseAbs2();
    p.value.array() -= s->lr * (s->m[i].array() / c1) /
                       ((s->v[i].array() / c2).sqrt() + s->eps);
  }
}

double ClipGlobalNorm(std::span<Param *const> params, double max_norm) {
  double sq = 0.0;
  for (const Param *p : params) sq += p->grad.squaredNorm();
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    double scale = max_norm / norm;
    for (Param *p : params) p->grad *= scale;
  }
  return norm;
}

// ---------------------------------------------------------------- grad check

GradCheckReport GradCheck(std::span<Param *const> params,
                          const std::function<double()> &forward_backward,
                          const std::function<double()> &forward, int per_param,
                          uint64_t seed, double h) {
  for (Param *p : params) p->ZeroGrad();
  forward_backward();
  std::vector<Matrix> analytic;
  for (Param *p : params) analytic.push_back(p->grad);

  GradCheckReport rep;
  Rng rng(seed);
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Param &p = *params[pi];
    const int64_t size = p.value.size();
    std::vector<int64_t> idx;
    if (size <= per_param) {
      for (int64_t i = 0; i < size; ++i) idx.push_back(i);
    } else {
      for (int i = 0; i < per_param; ++i) idx.push_back(static_cast<int64_t>(rng.Below(size)));
    }
    for (int64_t flat : idx) {
      int64_t r = flat / p.value.cols(), c = flat % p.value.cols();
      double saved = p.value(r, c);
      p.value(r, c) = saved + h;
      double up = forward();
      p.value(r, c) = saved - h;
      double down = forward();
      p.value(r, c) = saved;
      double numeric = (up - down) / (2.0 * h);
      double a = analytic[pi](r, c);
      double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-6);
      ++rep.checked;
      if (rel >= rep.max_rel_error) {
        rep.max_rel_error = rel;
        rep.worst = p.name + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------- checkpoints

void WriteCheckpoint(const std::filesystem::path &path, const std::string &header_json,
                     std::span<const CheckpointTensor> tensors) {
  auto header = nlohmann::json::parse(header_json);
  auto &list = header["tensors"] = nlohmann::json::array();
  for (const auto &t : tensors)
    list.push_back({{"name", t.name}, {"shape", {t.value.rows(), t.value.cols()}}});
  std::string text = header.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorCode::kIo, "cannot write checkpoint " + path.string());
  os.write("PMTLCKP1", 8);
  WriteU32(os, static_cast<uint32_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto &t : tensors)
    for (int64_t r = 0; r < t.value.rows(); ++r)
      for (int64_t c = 0; c < t.value.cols(); ++c) WriteF32(os, static_cast<float>(t.value(r, c)));
  if (!os) Fail(ErrorCode::kIo, "short write to " + path.string());
}

std::string ReadCheckpoint(const std::filesystem::path &path,
                           std::vector<CheckpointTensor> *tensors) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::string(magic, 8) != "PMTLCKP1")
    Fail(ErrorCode::kParse, "bad checkpoint magic in " + path.string());
  uint32_t len = ReadU32(is);
  std::string text(len, '\0');
  if (!is.read(text.data(), len)) Fail(ErrorCode::kParse, "truncated checkpoint header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorCode::kParse, std::string("checkpoint header is not JSON: ") + e.what());
  }
  tensors->clear();
  for (const auto &t : header.at("tensors")) {
    CheckpointTensor ct;
    ct.name = t.at("name").get<std::string>();
    int64_t rows = t.at("shape")[0].get<int64_t>(), cols = t.at("shape")[1].get<int64_t>();
    ct.value.resize(rows, cols);
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t c = 0; c < cols; ++c) ct.value(r, c) = ReadF32(is);
    tensors->push_back(std::move(ct));
  }
  if (is.peek() != std::char_traits<char>::eof())
    Fail(ErrorCode::kParse, "trailing bytes in checkpoint " + path.string());
  return text;
}

}  // namespace pmtl::nn
