// src/mtl.cc

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

#include "mtl.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>

#include "config.h"

namespace pmtl {

using nn::Matrix;

const char *ToString(TrunkType t) { return t == TrunkType::kDnn ? "dnn" : "lstm"; }

const char *ToString(SubtaskMode m) {
  switch (m) {
    case SubtaskMode::kAll: return "all";
    case SubtaskMode::kGenderOnly: return "gender";
    case SubtaskMode::kNaturalnessOnly: return "naturalness";
    case SubtaskMode::kNone: return "none";
  }
  return "?";
}

TrunkType ParseTrunk(const std::string &s) {
  if (s == "dnn" || s == "DNN") return TrunkType::kDnn;
  if (s == "lstm" || s == "LSTM") return TrunkType::kLstm;
  Fail(ErrorCode::kParse, "unknown trunk type '" + s + "'");
}

SubtaskMode ParseSubtasks(const std::string &s) {
  if (s == "all") return SubtaskMode::kAll;
  if (s == "gender") return SubtaskMode::kGenderOnly;
  if (s == "naturalness") return SubtaskMode::kNaturalnessOnly;
  if (s == "none" || s == "stl") return SubtaskMode::kNone;
  Fail(ErrorCode::kParse, "unknown subtask mode '" + s + "'");
}

MtlNetworkConfig MtlNetworkConfig::Defaults(TrunkType trunk) {
  MtlNetworkConfig c;
  c.trunk = trunk;
  if (trunk == TrunkType::kDnn) {
    c.layer_sizes = {256, 256, 256};
    c.context_frames = 25;
  } else {
    c.layer_sizes = {256, 256};
    c.context_frames = 1;
  }
  return c;
}

std::vector<TaskHead> MtlNetworkConfig::Heads() const {
  std::vector<TaskHead> h = {{kEmotionTask, kNumEmotions, 1.0}};
  if (subtasks == SubtaskMode::kAll || subtasks == SubtaskMode::kGenderOnly)
    h.push_back({kGenderTask, kNumGenders, lambda_gender});
  if (subtasks == SubtaskMode::kAll || subtasks == SubtaskMode::kNaturalnessOnly)
    h.push_back({kNaturalnessTask, kNumNaturalness, lambda_naturalness});
  return h;
}

void MtlNetworkConfig::Validate() const {
  if (layer_sizes.empty()) Fail(ErrorCode::kInvalidArgument, "trunk needs at least one layer");
  for (int s : layer_sizes)
    if (s < 1) Fail(ErrorCode::kInvalidArgument, "trunk layer sizes must be >= 1");
  if (context_frames < 1) Fail(ErrorCode::kInvalidArgument, "context_frames must be >= 1");
  if (trunk == TrunkType::kLstm && context_frames != 1)
    Fail(ErrorCode::kInvalidArgument, "LSTM trunks consume one frame per step");
  if (!(lambda_gender >= 0) || !(lambda_naturalness >= 0))
    Fail(ErrorCode::kInvalidArgument, "subtask weights must be non-negative");
}

void TrainConfig::Validate() const {
  if (batch_size < 1) Fail(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (!(lr > 0)) Fail(ErrorCode::kInvalidArgument, "learning rate must be positive");
  if (!(dropout_p >= 0 && dropout_p < 1))
    Fail(ErrorCode::kInvalidArgument, "dropout_p must lie in [0, 1)");
  if (max_epochs < 1) Fail(ErrorCode::kInvalidArgument, "max_epochs must be >= 1");
  if (patience < 1 || patience >= max_epochs)
    Fail(ErrorCode::kInvalidArgument, "patience must satisfy 1 <= patience < max_epochs");
  if (lstm_chunk_frames < 1) Fail(ErrorCode::kInvalidArgument, "lstm_chunk_frames must be >= 1");
}

double TotalLoss(const std::map<std::string, double> &per_task,
                 std::span<const TaskHead> heads) {
  double total = 0.0;
  bool have_main = false;
  for (const auto &h : heads) {
    auto it = per_task.find(h.name);
    if (it == per_task.end()) Fail(ErrorCode::kInvalidArgument, "missing loss for task '" + h.name + "'");
    if (h.name == kEmotionTask) {
      total += it->second;
      have_main = true;
    } else {
      if (!(h.lambda >= 0)) Fail(ErrorCode::kInvalidArgument, "negative subtask weight");
      total += h.lambda * it->second;
    }
  }
  if (!have_main) Fail(ErrorCode::kInvalidArgument, "missing loss for task 'emotion'");
  return total;
}

// ------------------------------------------------------------ model

MultiTaskModel MultiTaskModel::Build(const MtlNetworkConfig &config, uint64_t seed) {
  config.Validate();
  MultiTaskModel m;
  m.config_ = config;
  m.heads_ = config.Heads();
  // Trunk first, then heads in task order, so an STL build and an MTL build
  // with the same seed share the trunk and emotion head initialisation.
  Rng rng(DeriveSeed(seed, "init"));
  int width = config.InputWidth();
  for (size_t l = 0; l < config.layer_sizes.size(); ++l) {
    std::string name = "trunk" + std::to_string(l);
    if (config.trunk == TrunkType::kDnn)
      m.dense_.emplace_back(name, width, config.layer_sizes[l], nn::Activation::kRelu, &rng);
    else
      m.lstm_.emplace_back(name, width, config.layer_sizes[l], &rng);
    width = config.layer_sizes[l];
  }
  for (const auto &h : m.heads_)
    m.head_layers_.emplace_back("head." + h.name, width, h.n_classes, nn::Activation::kLinear,
                                &rng);
  return m;
}

std::vector<int> MultiTaskModel::trunk_sizes() const {
  std::vector<int> s;
  for (const auto &d : dense_) s.push_back(d.out());
  for (const auto &l : lstm_) s.push_back(l.hidden());
  return s;
}

bool MultiTaskModel::HasHead(const std::string &name) const {
  for (const auto &h : heads_)
    if (h.name == name) return true;
  return false;
}

const nn::Dense &MultiTaskModel::head(const std::string &name) const {
  for (size_t i = 0; i < heads_.size(); ++i)
    if (heads_[i].name == name) return head_layers_[i];
  Fail(ErrorCode::kInvalidArgument, "no head named '" + name + "'");
}

nn::Dense &MultiTaskModel::head(const std::string &name) {
  return const_cast<nn::Dense &>(std::as_const(*this).head(name));
}

std::vector<nn::Param *> MultiTaskModel::trunk_params() {
  std::vector<nn::Param *> out;
  for (auto &d : dense_)
    for (auto *p : d.params()) out.push_back(p);
  for (auto &l : lstm_)
    for (auto *p : l.params()) out.push_back(p);
  return out;
}

std::vector<nn::Param *> MultiTaskModel::params() {
  auto out = trunk_params();
  for (auto &h : head_layers_)
    for (auto *p : h.params()) out.push_back(p);
  return out;
}

void MultiTaskModel::DropSubtaskHeads() {
  std::vector<TaskHead> heads;
  std::vector<nn::Dense> layers;
  for (size_t i = 0; i < heads_.size(); ++i) {
    if (heads_[i].name == kEmotionTask) {
      heads.push_back(heads_[i]);
      layers.push_back(head_layers_[i]);
    }
  }
  heads_ = std::move(heads);
  head_layers_ = std::move(layers);
}

std::vector<double> MultiTaskModel::ForwardBackward(const Batch &batch, double dropout_p,
                                                    Rng *rng, bool backward) {
  const bool train = rng != nullptr;
  const nn::DropoutSpec spec{dropout_p, train ? nn::DropoutSpec::Mode::kTrain
                                              : nn::DropoutSpec::Mode::kEval};
  const size_t n_layers = config_.layer_sizes.size();
  dropout_masks_.resize(n_layers);

  Matrix h;
  nn::SequenceBatch seq;
  if (config_.trunk == TrunkType::kDnn) {
    h = batch.inputs;
    for (size_t l = 0; l < n_layers; ++l) {
      h = backward ? dense_[l].Forward(h) : dense_[l].Apply(h);
      h = nn::Dropout(h, spec, rng, &dropout_masks_[l]);
    }
  } else {
    seq.steps = batch.steps;
    seq.batch = batch.batch;
    seq.data = batch.inputs;
    for (size_t l = 0; l < n_layers; ++l) {
      seq = backward ? lstm_[l].Forward(seq) : lstm_[l].Apply(seq);
      seq.data = nn::Dropout(seq.data, spec, rng, &dropout_masks_[l]);
    }
    h = std::move(seq.data);
  }

  std::vector<double> losses(heads_.size());
  Matrix dh;
  if (backward) dh = Matrix::Zero(h.rows(), h.cols());
  for (size_t k = 0; k < heads_.size(); ++k) {
    auto lab = batch.labels.find(heads_[k].name);
    if (lab == batch.labels.end())
      Fail(ErrorCode::kInvalidArgument, "batch has no labels for task '" + heads_[k].name + "'");
    Matrix logits = backward ? head_layers_[k].Forward(h) : head_layers_[k].Apply(h);
    nn::XentResult res = nn::SoftmaxXent(logits, lab->second, batch.weights);
    losses[k] = res.loss;
    // A zero-weight head contributes exactly nothing to the gradient.
    if (backward && heads_[k].lambda != 0.0) {
      Matrix g = heads_[k].name == kEmotionTask ? res.grad : heads_[k].lambda * res.grad;
      dh += head_layers_[k].Backward(g);
    }
  }
  if (!backward) return losses;

  if (config_.trunk == TrunkType::kDnn) {
    for (size_t l = n_layers; l-- > 0;) {
      dh = dh.cwiseProduct(dropout_masks_[l]);
      dh = dense_[l].Backward(dh);
    }
  } else {
    nn::SequenceBatch d;
    d.steps = batch.steps;
    d.batch = batch.batch;
    d.data = std::move(dh);
    for (size_t l = n_layers; l-- > 0;) {
      d.data = d.data.cwiseProduct(dropout_masks_[l]);
      d = lstm_[l].Backward(d);
    }
  }
  return losses;
}

Matrix MultiTaskModel::ContextWindows(const RowMatrix &x) const {
  const int ctx = config_.context_frames;
  if (x.rows() < ctx)
    Fail(ErrorCode::kInvalidArgument, "too few frames for DNN context: " +
                                          std::to_string(x.rows()) + " < " + std::to_string(ctx));
  const int64_t n = x.rows() - ctx + 1, w = static_cast<int64_t>(ctx) * x.cols();
  Matrix out(n, w);
  for (int64_t s = 0; s < n; ++s)
    out.row(s) = Eigen::Map<const Eigen::RowVectorXd>(x.data() + s * x.cols(), w);
  return out;
}

Matrix MultiTaskModel::TrunkOutput(const RowMatrix &x) const {
  if (x.cols() != kFeatureDim)
    Fail(ErrorCode::kInvalidArgument, "features must have width 32");
  if (config_.trunk == TrunkType::kDnn) {
    Matrix h = ContextWindows(x);
    for (const auto &d : dense_) h = d.Apply(h);
    return h;
  }
  nn::SequenceBatch seq;
  seq.steps = static_cast<int>(x.rows());
  seq.batch = 1;
  seq.data = x;
  for (const auto &l : lstm_) seq = l.Apply(seq);
  return seq.data;
}

Matrix MultiTaskModel::EmotionPosteriors(const RowMatrix &x) const {
  return nn::Softmax(head(kEmotionTask).Apply(TrunkOutput(x)));
}

// ------------------------------------------------------------ training

namespace {

struct Sample {
  int utt;
  int start;
  int len;  // frames (LSTM chunk length); unused for DNN
};

std::vector<Sample> MakeSamples(const MtlNetworkConfig &net, const TrainConfig &tc,
                                const std::vector<RowMatrix> &feats) {
  std::vector<Sample> out;
  for (size_t u = 0; u < feats.size(); ++u) {
    const int n = static_cast<int>(feats[u].rows());
    if (net.trunk == TrunkType::kDnn) {
      for (int s = 0; s + net.context_frames <= n; ++s) out.push_back({static_cast<int>(u), s, 0});
    } else {
      for (int s = 0; s < n; s += tc.lstm_chunk_frames)
        out.push_back({static_cast<int>(u), s, std::min(tc.lstm_chunk_frames, n - s)});
    }
  }
  return out;
}

int LabelFor(const LabeledSequence &seq, const std::string &task) {
  if (task == kEmotionTask) return static_cast<int>(seq.emotion);
  if (task == kGenderTask) return static_cast<int>(seq.gender);
  return static_cast<int>(seq.naturalness);
}

MultiTaskModel::Batch Assemble(const MtlNetworkConfig &net, const std::vector<TaskHead> &heads,
                               std::span<const LabeledSequence> seqs,
                               const std::vector<RowMatrix> &feats,
                               std::span<const Sample> samples) {
  MultiTaskModel::Batch b;
  const int B = static_cast<int>(samples.size());
  if (B == 0) Fail(ErrorCode::kInvalidArgument, "empty batch");
  if (net.trunk == TrunkType::kDnn) {
    const int64_t w = static_cast<int64_t>(net.context_frames) * kFeatureDim;
    b.inputs.resize(B, w);
    b.batch = B;
    b.weights.assign(B, 1.0);
    for (const auto &h : heads) b.labels[h.name].resize(B);
    for (int r = 0; r < B; ++r) {
      const Sample &s = samples[r];
      b.inputs.row(r) =
          Eigen::Map<const Eigen::RowVectorXd>(feats[s.utt].data() + s.start * kFeatureDim, w);
      for (const auto &h : heads) b.labels[h.name][r] = LabelFor(seqs[s.utt], h.name);
    }
    return b;
  }
  int T = 0;
  for (const auto &s : samples) T = std::max(T, s.len);
  b.steps = T;
  b.batch = B;
  b.inputs = Matrix::Zero(static_cast<int64_t>(T) * B, kFeatureDim);
  b.weights.assign(static_cast<size_t>(T) * B, 0.0);
  for (const auto &h : heads) b.labels[h.name].assign(static_cast<size_t>(T) * B, 0);
  for (int c = 0; c < B; ++c) {
    const Sample &s = samples[c];
    for (int t = 0; t < s.len; ++t) {
      const int64_t row = static_cast<int64_t>(t) * B + c;
      b.inputs.row(row) = feats[s.utt].row(s.start + t);
      b.weights[row] = 1.0;
      for (const auto &h : heads) b.labels[h.name][row] = LabelFor(seqs[s.utt], h.name);
    }
  }
  // Padding rows keep label 0 and weight 0.
  return b;
}

double BatchWeight(const MultiTaskModel::Batch &b) {
  double w = 0.0;
  for (double x : b.weights) w += x;
  return w;
}

std::vector<RowMatrix> StandardizeAll(const Standardizer &st,
                                      std::span<const LabeledSequence> seqs) {
  std::vector<RowMatrix> out;
  out.reserve(seqs.size());
  for (const auto &s : seqs) {
    if (!s.features) Fail(ErrorCode::kInvalidArgument, "sequence without features");
    out.push_back(st.Apply(s.features->data));
  }
  return out;
}

// Weighted mean losses over all samples, eval mode.
std::vector<double> Evaluate(MultiTaskModel &model, std::span<const LabeledSequence> seqs,
                             const std::vector<RowMatrix> &feats,
                             const std::vector<Sample> &samples, int batch_size) {
  std::vector<double> sum(model.heads().size(), 0.0);
  double weight = 0.0;
  for (size_t i = 0; i < samples.size(); i += batch_size) {
    size_t n = std::min<size_t>(batch_size, samples.size() - i);
    auto batch = Assemble(model.config(), model.heads(), seqs, feats,
                          std::span<const Sample>(samples).subspan(i, n));
    auto losses = model.ForwardBackward(batch, 0.0, nullptr, false);
    double w = BatchWeight(batch);
    for (size_t k = 0; k < sum.size(); ++k) sum[k] += losses[k] * w;
    weight += w;
  }
  for (double &s : sum) s /= weight;
  return sum;
}

std::map<std::string, double> ByName(const std::vector<TaskHead> &heads,
                                     const std::vector<double> &losses) {
  std::map<std::string, double> m;
  for (size_t k = 0; k < heads.size(); ++k) m[heads[k].name] = losses[k];
  return m;
}

}  // namespace

TrainedModel Train(const MtlNetworkConfig &net, std::span<const LabeledSequence> train,
                   std::span<const LabeledSequence> validation, const TrainConfig &tc,
                   uint64_t init_seed) {
  tc.Validate();
  if (train.empty() || validation.empty())
    Fail(ErrorCode::kInvalidArgument, "training and validation sets must be non-empty");

  TrainedModel out;
  out.train_config = tc;
  out.init_seed = init_seed;
  out.model = MultiTaskModel::Build(net, init_seed);
  std::vector<const FrameFeatureMatrix *> train_feats;
  for (const auto &s : train) train_feats.push_back(s.features);
  out.standardizer = Standardizer::Fit(std::span<const FrameFeatureMatrix *const>(train_feats));

  const auto train_x = StandardizeAll(out.standardizer, train);
  const auto val_x = StandardizeAll(out.standardizer, validation);
  std::vector<Sample> train_samples = MakeSamples(net, tc, train_x);
  const std::vector<Sample> val_samples = MakeSamples(net, tc, val_x);
  if (train_samples.empty() || val_samples.empty())
    Fail(ErrorCode::kInvalidArgument, "no training samples: utterances shorter than the context");

  MultiTaskModel &model = out.model;
  const auto heads = model.heads();
  auto params = model.params();
  nn::AdamState adam;
  adam.lr = tc.lr;
  Rng rng(DeriveSeed(tc.seed, "train"));

  double best = std::numeric_limits<double>::infinity();
  std::vector<Matrix> best_params;
  int bad_epochs = 0;
  for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    rng.Shuffle(train_samples);
    std::vector<double> sum(heads.size(), 0.0);
    double weight = 0.0;
    for (size_t i = 0; i < train_samples.size(); i += tc.batch_size) {
      size_t n = std::min<size_t>(tc.batch_size, train_samples.size() - i);
      auto batch = Assemble(net, heads, train, train_x,
                            std::span<const Sample>(train_samples).subspan(i, n));
      for (auto *p : params) p->ZeroGrad();
      auto losses = model.ForwardBackward(batch, tc.dropout_p, &rng, true);
      double total = TotalLoss(ByName(heads, losses), heads);
      if (!std::isfinite(total))
        Fail(ErrorCode::kNumeric, "training diverged: non-finite loss at epoch " +
                                      std::to_string(epoch) + ", batch " +
                                      std::to_string(i / tc.batch_size));
      nn::ClipGlobalNorm(params, tc.clip_norm);
      nn::AdamStep(&adam, params);
      double w = BatchWeight(batch);
      for (size_t k = 0; k < heads.size(); ++k) sum[k] += losses[k] * w;
      weight += w;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    for (double s : sum) rec.train_loss.push_back(s / weight);
    rec.train_total = TotalLoss(ByName(heads, rec.train_loss), heads);
    rec.val_loss = Evaluate(model, validation, val_x, val_samples, std::max(tc.batch_size, 512));
    rec.val_total = TotalLoss(ByName(heads, rec.val_loss), heads);
    if (!std::isfinite(rec.val_total))
      Fail(ErrorCode::kNumeric, "training diverged: non-finite validation loss at epoch " +
                                    std::to_string(epoch));
    out.history.push_back(rec);

    if (rec.val_total < best) {
      best = rec.val_total;
      out.best_epoch = epoch;
      best_params.clear();
      for (auto *p : params) best_params.push_back(p->value);
      bad_epochs = 0;
    } else if (++bad_epochs >= tc.patience) {
      break;
    }
  }
  // Checkpoints store float32; rounding here makes a reloaded model behave
  // exactly like the one returned.
  auto to_float = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  for (size_t i = 0; i < params.size(); ++i) {
    params[i]->value = best_params[i].unaryExpr(to_float);
    params[i]->ZeroGrad();
  }
  out.standardizer = Standardizer(out.standardizer.mean().unaryExpr(to_float),
                                  out.standardizer.stddev().unaryExpr(to_float));
  return out;
}

Matrix EmotionPosteriors(const TrainedModel &trained, const FrameFeatureMatrix &features) {
  if (features.data.cols() != kFeatureDim)
    Fail(ErrorCode::kInvalidArgument, "features must have width 32");
  return trained.model.EmotionPosteriors(trained.standardizer.Apply(features.data));
}

// ------------------------------------------------------------ persistence

void SaveModel(const TrainedModel &trained, const std::filesystem::path &path) {
  nlohmann::json header;
  header["format"] = "pmtl-mtl";
  header["network"] = ToJson(trained.model.config());
  header["train"] = ToJson(trained.train_config);
  header["init_seed"] = trained.init_seed;
  header["best_epoch"] = trained.best_epoch;
  nlohmann::json heads = nlohmann::json::array();
  for (const auto &h : trained.model.heads())
    heads.push_back({{"name", h.name}, {"classes", h.n_classes}, {"lambda", h.lambda}});
  header["heads"] = heads;

  std::vector<nn::CheckpointTensor> tensors;
  tensors.push_back({"standardizer.mean", trained.standardizer.mean().transpose()});
  tensors.push_back({"standardizer.stddev", trained.standardizer.stddev().transpose()});
  auto &model = const_cast<MultiTaskModel &>(trained.model);
  for (auto *p : model.params()) tensors.push_back({p->name, p->value});
  nn::WriteCheckpoint(path, header.dump(), tensors);
}

TrainedModel LoadModel(const std::filesystem::path &path) {
  std::vector<nn::CheckpointTensor> tensors;
  auto header = nlohmann::json::parse(nn::ReadCheckpoint(path, &tensors));
  if (header.value("format", "") != "pmtl-mtl")
    Fail(ErrorCode::kParse, path.string() + " is not a multi-task model checkpoint");
  TrainedModel t;
  MtlNetworkConfig net;
  FromJson(header.at("network"), &net);
  FromJson(header.at("train"), &t.train_config);
  t.init_seed = header.at("init_seed").get<uint64_t>();
  t.best_epoch = header.at("best_epoch").get<int>();
  t.model = MultiTaskModel::Build(net, t.init_seed);

  std::map<std::string, const Matrix *> by_name;
  for (const auto &ct : tensors) by_name[ct.name] = &ct.value;
  auto take = [&](const std::string &name) -> const Matrix & {
    auto it = by_name.find(name);
    if (it == by_name.end()) Fail(ErrorCode::kParse, "checkpoint is missing tensor " + name);
    return *it->second;
  };
  t.standardizer = Standardizer(take("standardizer.mean").row(0).transpose(),
                                take("standardizer.stddev").row(0).transpose());
  bool has_subtask_tensors = false;
  for (const auto &ct : tensors)
    if (ct.name.rfind("head.", 0) == 0 && ct.name.rfind("head.emotion", 0) != 0)
      has_subtask_tensors = true;
  if (!has_subtask_tensors) t.model.DropSubtaskHeads();
  for (auto *p : t.model.params()) {
    const Matrix &v = take(p->name);
    if (v.rows() != p->value.rows() || v.cols() != p->value.cols())
      Fail(ErrorCode::kParse, "shape mismatch for tensor " + p->name);
    p->value = v;
    p->ZeroGrad();
  }
  return t;
}

void WriteHistoryCsv(const TrainedModel &trained, const std::filesystem::path &path) {
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kIo, "cannot write " + path.string());
  const auto &heads = trained.model.heads();
  os << "epoch";
  for (const auto &h : heads) os << ",train_" << h.name;
  os << ",train_total";
  for (const auto &h : heads) os << ",val_" << h.name;
  os << ",val_total\n";
  os.precision(10);
  for (const auto &r : trained.history) {
    os << r.epoch;
    for (size_t k = 0; k < heads.size() && k < r.train_loss.size(); ++k) os << ',' << r.train_loss[k];
    os << ',' << r.train_total;
    for (size_t k = 0; k < heads.size() && k < r.val_loss.size(); ++k) os << ',' << r.val_loss[k];
    os << ',' << r.val_total << '\n';
  }
}

}  // namespace pmtl
