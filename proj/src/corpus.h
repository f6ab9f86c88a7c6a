// src/corpus.h

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

#ifndef PMTL_CORPUS_H_
#define PMTL_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace pmtl {

enum class Emotion : int { kNeutral = 0, kHappy = 1, kSad = 2, kAngry = 3 };
enum class Gender : int {
  kFemaleAdult = 0,
  kMaleAdult = 1,
  kFemaleChild = 2,
  kMaleChild = 3
};
enum class Naturalness : int { kNatural = 0, kActed = 1 };

inline constexpr int kNumEmotions = 4;
inline constexpr int kNumGenders = 4;
inline constexpr int kNumNaturalness = 2;
inline constexpr int kSampleRate = 16000;

const char *ToString(Emotion e);
const char *ToString(Gender g);
const char *ToString(Naturalness n);
// These throw Error(kParse) with "unknown <kind> label" on anything outside
// the closed vocabulary.
Emotion ParseEmotion(const std::string &s);
Gender ParseGender(const std::string &s);
Naturalness ParseNaturalness(const std::string &s);

inline bool IsFemale(Gender g) {
  return g == Gender::kFemaleAdult || g == Gender::kFemaleChild;
}
inline bool IsChild(Gender g) {
  return g == Gender::kFemaleChild || g == Gender::kMaleChild;
}

struct UtteranceRecord {
  std::string utterance_id;
  std::string audio_path;  // as written in the manifest; may be relative
  Emotion emotion = Emotion::kNeutral;
  Gender gender = Gender::kFemaleAdult;
  Naturalness naturalness = Naturalness::kNatural;
  std::string speaker_id;
  std::string corpus_id;

  bool operator==(const UtteranceRecord &) const = default;
};

/// Per-corpus overview in the shape of the usual corpus summary table.
struct CorpusSummary {
  std::string corpus_id;
  int speakers = 0;
  std::array<int, kNumEmotions> emotion{};
  int female = 0;
  int male = 0;
  int natural = 0;
  int acted = 0;
  int total = 0;
};

struct CorpusManifest {
  std::vector<UtteranceRecord> records;
  int sample_rate = kSampleRate;
  // Directory against which relative audio paths are resolved.
  std::filesystem::path root;

  std::filesystem::path ResolveAudio(const UtteranceRecord &r) const;
  const UtteranceRecord *Find(const std::string &utterance_id) const;

  using CountKey = std::tuple<std::string, Emotion, Gender, Naturalness>;
  std::map<CountKey, int> LabelCounts() const;
  std::vector<CorpusSummary> Summaries() const;

  bool operator==(const CorpusManifest &o) const {
    return records == o.records && sample_rate == o.sample_rate;
  }
};

inline constexpr const char *kManifestHeader =
    "utterance_id,audio_path,emotion,gender,naturalness,speaker_id,corpus_id";

/// Parses a manifest CSV. With `check_audio` every referenced file must
/// exist; relative paths resolve against the manifest's directory.
CorpusManifest LoadManifest(const std::filesystem::path &path,
                            bool check_audio = true);
void WriteManifest(const CorpusManifest &m, const std::filesystem::path &path);

/// Throws on duplicate utterance ids or empty manifests.
void ValidateManifest(const CorpusManifest &m);

struct SynthConfig {
  int n_corpora = 2;
  int speakers_per_corpus = 5;
  int utterances_per_speaker = 10;
  double duration_s = 1.0;
  uint64_t seed = 7;
  // Emotion proportions (neutral, happy, sad, angry); balanced cycling when
  // absent.
  std::optional<std::array<double, kNumEmotions>> class_balance;

  void Validate() const;
};

/// Writes `<out_dir>/manifest.csv` and `<out_dir>/wav/...` and returns the
/// manifest (rooted at out_dir). Output bytes are a pure function of config.
CorpusManifest GenerateSynthetic(const SynthConfig &config,
                                 const std::filesystem::path &out_dir);

/// Renders one synthetic utterance without touching the filesystem. Exposed
/// for tests; GenerateSynthetic quantises this to PCM16.
std::vector<double> SynthesizeUtterance(const UtteranceRecord &rec,
                                        const SynthConfig &config,
                                        uint64_t utterance_seed);

enum class FoldMode { kLoso, kLoco, kStratified };
enum class GroupKey { kCorpus, kCorpusNaturalness };

const char *ToString(FoldMode m);

struct Fold {
  std::string test_group;                // speaker id, group id or "aggregated"
  std::vector<std::string> train_groups;  // empty for LOSO / stratified
  std::vector<std::string> train_ids;
  std::vector<std::string> validation_ids;
  std::vector<std::string> test_ids;
};

struct FoldPlan {
  FoldMode mode = FoldMode::kLoso;
  std::vector<Fold> folds;
};

/// Group label of a record under `key`. kCorpusNaturalness only splits
/// corpora that contain both natural and acted speech ("<id>N" / "<id>A").
std::string GroupOf(const UtteranceRecord &r, GroupKey key,
                    const std::vector<CorpusManifest> &manifests);

/// LOSO (exactly one manifest) or LOCO (>= 2 groups). 10% of each fold's
/// training utterances go to validation, uniformly at random from `seed`.
FoldPlan MakeFolds(const std::vector<CorpusManifest> &manifests, FoldMode mode,
                   uint64_t seed, GroupKey key = GroupKey::kCorpus);

/// Single shuffled train/validation/test split with emotion-stratified
/// allocation.
FoldPlan StratifiedSplit(const std::vector<CorpusManifest> &manifests,
                         std::array<double, 3> fractions, uint64_t seed);

/// Fraction of training utterances carved out as validation in MakeFolds.
inline constexpr double kValidationFraction = 0.1;

}  // namespace pmtl

#endif  // PMTL_CORPUS_H_
