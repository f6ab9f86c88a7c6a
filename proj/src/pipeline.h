// src/pipeline.h

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

#ifndef PMTL_PIPELINE_H_
#define PMTL_PIPELINE_H_

// One function per command-line stage. Each writes its artifacts plus a
// config.json from which the same stage can be re-run to identical bytes.

#include <filesystem>
#include <string>
#include <vector>

#include "config.h"
#include "embed.h"
#include "experiment.h"

namespace pmtl {

/// Loads `config.manifests`, keeping only `config.corpus` records when set.
std::vector<CorpusManifest> LoadRunManifests(const RunConfig &config);

/// Manifest, WAVs and config.json under out_dir.
CorpusManifest SynthStage(const SynthConfig &config, const std::filesystem::path &out_dir);

/// <out_dir>/<utterance_id>.pmtl (and .csv when requested) plus index.csv.
/// Returns the number of utterances written.
int FeaturesStage(const RunConfig &config, const std::filesystem::path &out_dir, bool csv);

/// Trains on every utterance of the run's manifests with a seeded 10%
/// validation carve-out; writes config.json, history.csv and model.ckpt.
TrainedModel TrainStage(const RunConfig &config, const std::filesystem::path &out_dir);

/// HLF table of every utterance of the run's manifests under a saved model.
std::vector<HlfRow> HlfStage(const RunConfig &config, const std::filesystem::path &model_path,
                             const std::filesystem::path &out_csv);

struct ElmStageResult {
  ConfusionMatrix confusion;
  double ua = 0.0;
  int n_train = 0, n_test = 0;
};

/// Fits on `train_csv` and scores `test_csv`. With an empty `test_csv` the
/// partition column of `train_csv` decides: rows marked "test" are scored and
/// the rest are fitted, or everything is used for both when no row is marked.
ElmStageResult ElmStage(const std::filesystem::path &train_csv,
                        const std::filesystem::path &test_csv, const ElmConfig &config,
                        uint64_t seed, const std::filesystem::path &out_dir);

struct XvalResult {
  std::vector<ExperimentReport> reports;  // one, or eight for a grid
  ResultTable table;                      // only for a grid
};

XvalResult XvalStage(const RunConfig &config, const std::filesystem::path &out_dir);

/// embedding.csv, embedding.svg, kl_trace.csv and config.json.
TsneResult EmbedStage(const std::filesystem::path &hlf_csv, const TsneConfig &config,
                      const std::filesystem::path &out_dir);

/// Tabulates report.json files of several runs; each run after the first is
/// tested against the first.
ResultTable ReportStage(const std::vector<std::filesystem::path> &run_dirs,
                        const std::filesystem::path &out_dir);

}  // namespace pmtl

#endif  // PMTL_PIPELINE_H_
