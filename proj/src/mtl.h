// src/mtl.h

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

#ifndef PMTL_MTL_H_
#define PMTL_MTL_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "corpus.h"
#include "frame_features.h"
#include "nn.h"

namespace pmtl {

enum class TrunkType { kDnn, kLstm };
enum class SubtaskMode { kAll, kGenderOnly, kNaturalnessOnly, kNone };

const char *ToString(TrunkType t);
const char *ToString(SubtaskMode m);
TrunkType ParseTrunk(const std::string &s);      // "dnn" | "lstm"
SubtaskMode ParseSubtasks(const std::string &s);  // "all" | "gender" | "naturalness" | "none"

inline constexpr const char *kEmotionTask = "emotion";
inline constexpr const char *kGenderTask = "gender";
inline constexpr const char *kNaturalnessTask = "naturalness";

struct TaskHead {
  std::string name;
  int n_classes = 0;
  double lambda = 1.0;  // the main task's weight is fixed at 1
};

struct MtlNetworkConfig {
  TrunkType trunk = TrunkType::kLstm;
  std::vector<int> layer_sizes = {256, 256};
  int context_frames = 1;
  SubtaskMode subtasks = SubtaskMode::kAll;
  double lambda_gender = 0.1;
  double lambda_naturalness = 0.1;

  /// 3x256 with a 25-frame (250 ms) context for DNN, 2x256 per frame for
  /// LSTM.
  static MtlNetworkConfig Defaults(TrunkType trunk);

  /// Emotion first, then the active subtasks in (gender, naturalness) order.
  std::vector<TaskHead> Heads() const;
  int InputWidth() const { return context_frames * kFeatureDim; }
  void Validate() const;
};

struct TrainConfig {
  int batch_size = 128;
  double lr = 3e-3;
  double dropout_p = 0.5;
  int max_epochs = 100;
  int patience = 5;
  uint64_t seed = 0;
  int lstm_chunk_frames = 300;
  double clip_norm = 5.0;

  void Validate() const;
};

/// eps_total = eps_main + sum_i lambda_i * eps_sub_i. Throws when a loss for
/// one of `heads` is missing.
double TotalLoss(const std::map<std::string, double> &per_task,
                 std::span<const TaskHead> heads);

/// One utterance's frames and its labels, broadcast to every frame/window.
struct LabeledSequence {
  const FrameFeatureMatrix *features = nullptr;
  Emotion emotion = Emotion::kNeutral;
  Gender gender = Gender::kFemaleAdult;
  Naturalness naturalness = Naturalness::kNatural;
};

/// Shared trunk plus one softmax head per task, all heads attached to the
/// last trunk layer.
class MultiTaskModel {
 public:
  MultiTaskModel() = default;
  static MultiTaskModel Build(const MtlNetworkConfig &config, uint64_t seed);

  const MtlNetworkConfig &config() const { return config_; }
  const std::vector<TaskHead> &heads() const { return heads_; }
  int input_width() const { return config_.InputWidth(); }
  std::vector<int> trunk_sizes() const;
  bool HasHead(const std::string &name) const;
  const nn::Dense &head(const std::string &name) const;
  nn::Dense &head(const std::string &name);

  std::vector<nn::Param *> params();
  std::vector<nn::Param *> trunk_params();

  /// Drops gender/naturalness heads. Emotion posteriors are unaffected.
  void DropSubtaskHeads();

  // -- training-time passes (single-threaded; cache activations) --
  struct Batch {
    nn::Matrix inputs;                // DNN: B x (ctx*32); LSTM: (T*B) x 32
    int steps = 1, batch = 0;         // LSTM layout
    std::vector<double> weights;      // per row; 0 masks padding
    std::map<std::string, std::vector<int>> labels;  // per head, per row
  };
  /// Returns per-task losses (head order). Fills parameter grads (which the
  /// caller zeroes) when `backward` is true. `rng` drives dropout; pass
  /// nullptr for eval mode.
  std::vector<double> ForwardBackward(const Batch &batch, double dropout_p, Rng *rng,
                                      bool backward);

  /// Frame- or window-level emotion posteriors for standardized features.
  nn::Matrix EmotionPosteriors(const RowMatrix &standardized) const;
  /// Trunk output for standardized features (one row per step).
  nn::Matrix TrunkOutput(const RowMatrix &standardized) const;

 private:
  nn::Matrix ContextWindows(const RowMatrix &x) const;

  MtlNetworkConfig config_;
  std::vector<TaskHead> heads_;
  std::vector<nn::Dense> dense_;
  std::vector<nn::Lstm> lstm_;
  std::vector<nn::Dense> head_layers_;
  std::vector<nn::Matrix> dropout_masks_;
};

struct EpochRecord {
  int epoch = 0;
  std::vector<double> train_loss;  // per head, heads() order
  double train_total = 0.0;
  std::vector<double> val_loss;
  double val_total = 0.0;
};

struct TrainedModel {
  MultiTaskModel model;
  Standardizer standardizer;
  TrainConfig train_config;
  uint64_t init_seed = 0;
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 1-based epoch whose parameters were restored
};

/// Fits the standardizer on `train` frames, then runs mini-batch Adam under
/// the combined loss with early stopping on validation eps_total.
TrainedModel Train(const MtlNetworkConfig &net, std::span<const LabeledSequence> train,
                   std::span<const LabeledSequence> validation, const TrainConfig &tc,
                   uint64_t init_seed);

/// n_steps x 4 emotion posteriors: one row per frame (LSTM) or per 25-frame
/// window (DNN). Subtask heads are never evaluated.
nn::Matrix EmotionPosteriors(const TrainedModel &trained, const FrameFeatureMatrix &features);

void SaveModel(const TrainedModel &trained, const std::filesystem::path &path);
TrainedModel LoadModel(const std::filesystem::path &path);
void WriteHistoryCsv(const TrainedModel &trained, const std::filesystem::path &path);

}  // namespace pmtl

#endif  // PMTL_MTL_H_
