// src/experiment.h

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

#ifndef PMTL_EXPERIMENT_H_
#define PMTL_EXPERIMENT_H_

// Fold orchestration: features -> standardizer -> trunk training -> HLF ->
// ELM -> confusion matrix, for the within-corpus (LOSO), cross-corpus (LOCO)
// and aggregated 80/10/10 protocols, plus the comparison table that pairs
// per-fold UAs of several configurations.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "config.h"
#include "corpus.h"
#include "elm.h"
#include "frame_features.h"
#include "hlf.h"
#include "metrics.h"
#include "mtl.h"

namespace pmtl {

/// Frame features of every utterance of a set of manifests.
class FeatureStore {
 public:
  /// Extraction is spread over `jobs` threads; the result does not depend on
  /// the thread count.
  static FeatureStore Extract(const std::vector<CorpusManifest> &manifests,
                              const FeatureConfig &config, int jobs = 1);

  const FrameFeatureMatrix &features(const std::string &utterance_id) const;
  const UtteranceRecord &record(const std::string &utterance_id) const;
  size_t size() const { return features_.size(); }

 private:
  std::map<std::string, FrameFeatureMatrix> features_;
  std::map<std::string, UtteranceRecord> records_;
};

struct PipelineConfig {
  std::string name;  // column label, e.g. "LSTM-ALL"
  MtlNetworkConfig network;
  TrainConfig train;  // seed is replaced per fold
  ElmConfig elm;      // seed is replaced per fold
  double hlf_theta = kDefaultHlfTheta;
};

/// "DNN-STL", "LSTM-ALL", "DNN-GENDER", ...
std::string ConfigName(TrunkType trunk, SubtaskMode subtasks);

/// The eight trunk x subtask configurations in table column order: DNN-STL,
/// LSTM-STL, DNN-ALL, LSTM-ALL, DNN-GENDER, LSTM-GENDER, DNN-NATURALNESS,
/// LSTM-NATURALNESS. Layer sizes come from `base`; a DNN keeps base's context
/// only when base is itself a DNN.
std::vector<PipelineConfig> GridConfigs(const PipelineConfig &base);

struct FoldResult {
  int index = 0;
  std::string test_group;
  std::vector<std::string> train_groups;
  std::string test_kind;  // "natural", "acted" or "mixed"
  bool complete = false;
  std::string diagnostic;  // why the fold failed
  ConfusionMatrix confusion;
  double ua = 0.0;
  std::array<double, kNumEmotions> recall{};  // -1 for classes absent from the test set
  int n_train = 0, n_validation = 0, n_test = 0;
  int best_epoch = 0;
  int epochs_run = 0;
};

struct ExperimentReport {
  std::string name;
  Protocol protocol = Protocol::kCross;
  uint64_t seed = 0;
  std::vector<FoldResult> folds;
  /// Mean over complete folds; NaN when none completed.
  double mean_ua = 0.0;
  int complete_folds = 0;
};

/// What a fold leaves behind besides its metrics.
struct FoldArtifacts {
  TrainedModel model;
  ElmModel elm;
  std::vector<HlfRow> hlf;  // test rows; every partition for the aggregated split
};

/// LOSO, LOCO or the seeded 80/10/10 split.
FoldPlan PlanFolds(Protocol protocol, const std::vector<CorpusManifest> &manifests,
                   uint64_t seed, GroupKey key);

/// Runs one configuration over `plan`. Fold f draws every seed from
/// DeriveSeed(seed, "fold", f), so results do not depend on `jobs` or on the
/// order folds finish in. A failing fold is recorded, not rethrown.
ExperimentReport RunExperiment(Protocol protocol, const FeatureStore &store,
                               const FoldPlan &plan, const PipelineConfig &config,
                               uint64_t seed, int jobs = 1,
                               std::vector<FoldArtifacts> *artifacts = nullptr);

struct Comparison {
  std::string baseline;
  std::string candidate;
  int pairs = 0;           // folds complete in both reports
  double mean_gain = 0.0;  // candidate - baseline, averaged over pairs
  bool tested = false;     // false when every difference is zero or no pairs exist
  std::string note;
  WilcoxonResult wilcoxon;
};

/// Pairs the per-fold UAs of two reports by test group.
Comparison CompareReports(const ExperimentReport &baseline, const ExperimentReport &candidate,
                          double alpha = 0.05);

struct TableRow {
  std::string train;  // "{A,E,F}" style, empty for LOSO / aggregated
  std::string test;
  std::string kind;
  std::vector<double> ua;  // per column, NaN for an incomplete fold
};

/// Fold rows x configuration columns, followed by means over natural test
/// groups, acted test groups and all folds.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<TableRow> rows;
  std::vector<double> mean_natural, mean_acted, mean_overall;
  std::vector<Comparison> comparisons;
};

/// `baseline_of[c]` is the column that column c is tested against, or -1.
ResultTable BuildTable(const std::vector<ExperimentReport> &reports,
                       const std::vector<int> &baseline_of, double alpha = 0.05);
/// Baselines for GridConfigs order: every MTL column against the STL column
/// of the same trunk.
std::vector<int> GridBaselines();

Json ToJson(const ExperimentReport &r);
ExperimentReport ReportFromJson(const Json &j);
Json ToJson(const ResultTable &t);

/// report.json, report.csv and confusion.csv.
void WriteReportFiles(const ExperimentReport &r, const std::filesystem::path &dir,
                      const Json &config);
void WriteTableFiles(const ResultTable &t, const std::filesystem::path &dir);

}  // namespace pmtl

#endif  // PMTL_EXPERIMENT_H_
