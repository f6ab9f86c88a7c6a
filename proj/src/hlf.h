// src/hlf.h

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

#ifndef PMTL_HLF_H_
#define PMTL_HLF_H_

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "corpus.h"
#include "nn.h"

namespace pmtl {

inline constexpr int kHlfDim = 16;
inline constexpr double kDefaultHlfTheta = 0.2;

/// Four functionals per emotion class, class-major:
/// [c0 min, c0 max, c0 mean, c0 frac>theta, c1 min, ...].
struct HighLevelFeatureVector {
  std::array<double, kHlfDim> values{};
  double theta = kDefaultHlfTheta;
};

/// Collapses an n x 4 posterior sequence (rows summing to 1) into 16 values.
HighLevelFeatureVector ComputeHlf(const nn::Matrix &posteriors,
                                  double theta = kDefaultHlfTheta);

/// "neutral_min", "neutral_max", "neutral_mean", "neutral_frac", ...
const std::array<std::string, kHlfDim> &HlfColumnNames();

/// One row of an HLF table: the utterance, its vector and its labels.
struct HlfRow {
  std::string utterance_id;
  HighLevelFeatureVector hlf;
  Emotion emotion = Emotion::kNeutral;
  Gender gender = Gender::kFemaleAdult;
  Naturalness naturalness = Naturalness::kNatural;
  std::string speaker_id;
  std::string corpus_id;
  std::string partition;  // "train", "validation", "test" or empty
};

// CSV: utterance_id, the 16 named columns, emotion, gender, naturalness,
// speaker_id, corpus_id, partition. Values are printed with 17 significant
// digits so a read after write is exact.
void WriteHlfCsv(const std::filesystem::path &path, const std::vector<HlfRow> &rows);
std::vector<HlfRow> ReadHlfCsv(const std::filesystem::path &path);

}  // namespace pmtl

#endif  // PMTL_HLF_H_
