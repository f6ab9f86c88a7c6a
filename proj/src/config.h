// src/config.h

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

#ifndef PMTL_CONFIG_H_
#define PMTL_CONFIG_H_

// JSON forms of every configuration struct. FromJson starts from whatever
// the target already holds and overwrites only the keys present; unknown
// keys are rejected so that a typo cannot silently fall back to a default.

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "corpus.h"
#include "elm.h"
#include "embed.h"
#include "frame_features.h"
#include "hlf.h"
#include "mtl.h"

namespace pmtl {

using Json = nlohmann::json;

enum class Protocol { kWithin, kCross, kAggregated };
const char *ToString(Protocol p);
Protocol ParseProtocol(const std::string &s);  // "within" | "cross" | "aggregated"
const char *ToString(GroupKey k);
GroupKey ParseGroupKey(const std::string &s);  // "corpus" | "corpus_naturalness"

/// Everything a run needs besides its output directory. `seed` is the only
/// source of randomness; the seeds of the nested configs are derived from it
/// per fold and are not part of the serialized form.
struct RunConfig {
  uint64_t seed = 0;
  Protocol protocol = Protocol::kCross;
  GroupKey group_key = GroupKey::kCorpus;
  std::vector<std::string> manifests;
  std::string corpus;  // optional corpus_id filter
  bool grid = false;   // all eight trunk x subtask configurations
  int jobs = 1;
  std::optional<SynthConfig> synth;
  FeatureConfig features;
  MtlNetworkConfig network = MtlNetworkConfig::Defaults(TrunkType::kLstm);
  TrainConfig train;
  ElmConfig elm;
  double hlf_theta = kDefaultHlfTheta;
  TsneConfig tsne;

  void Validate() const;
};

Json ToJson(const FeatureConfig &c);
Json ToJson(const MtlNetworkConfig &c);
Json ToJson(const TrainConfig &c);
Json ToJson(const ElmConfig &c);
Json ToJson(const TsneConfig &c);
Json ToJson(const SynthConfig &c);
Json ToJson(const RunConfig &c);

void FromJson(const Json &j, FeatureConfig *c);
/// A "trunk" key without "layer_sizes" / "context_frames" resets those two to
/// the defaults of that trunk.
void FromJson(const Json &j, MtlNetworkConfig *c);
void FromJson(const Json &j, TrainConfig *c);
void FromJson(const Json &j, ElmConfig *c);
void FromJson(const Json &j, TsneConfig *c);
void FromJson(const Json &j, SynthConfig *c);
void FromJson(const Json &j, RunConfig *c);

/// Parses a JSON document, mapping syntax errors to Error(kParse).
Json ParseJson(const std::string &text, const std::string &what);
Json ReadJsonFile(const std::string &path);
/// Pretty-printed with a trailing newline.
void WriteJsonFile(const std::string &path, const Json &j);

}  // namespace pmtl

#endif  // PMTL_CONFIG_H_
