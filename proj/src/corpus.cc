// src/corpus.cc

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

#include "corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "common.h"

namespace pmtl {

namespace {

constexpr const char *kEmotionNames[] = {"neutral", "happy", "sad", "angry"};
constexpr const char *kGenderNames[] = {"female_adult", "male_adult",
                                        "female_child", "male_child"};
constexpr const char *kNaturalnessNames[] = {"natural", "acted"};

template <typename E, size_t N>
E ParseLabel(const std::string &s, const char *const (&names)[N],
             const char *kind) {
  for (size_t i = 0; i < N; ++i)
    if (s == names[i]) return static_cast<E>(i);
  Fail(ErrorCode::kParse, std::string("unknown ") + kind + " label '" + s + "'");
}

void CheckDistinctSpeakers(const std::vector<CorpusManifest> &manifests) {
  std::unordered_map<std::string, std::string> corpus_of;
  std::unordered_set<std::string> ids;
  for (const auto &m : manifests) {
    for (const auto &r : m.records) {
      auto [it, inserted] = corpus_of.emplace(r.speaker_id, r.corpus_id);
      if (!inserted && it->second != r.corpus_id)
        Fail(ErrorCode::kInvalidArgument, "speaker '" + r.speaker_id +
                                              "' appears in corpora '" + it->second +
                                              "' and '" + r.corpus_id + "'");
      if (!ids.insert(r.utterance_id).second)
        Fail(ErrorCode::kInvalidArgument,
             "duplicate utterance_id '" + r.utterance_id + "' across manifests");
    }
  }
}

size_t ValidationCount(size_t n_train) {
  if (n_train < 2) return 0;
  size_t k = static_cast<size_t>(std::lround(kValidationFraction * n_train));
  return std::clamp<size_t>(k, 1, n_train - 1);
}

// Moves a seeded uniform 10% of `pool` (kept in its original order) into
// fold.validation_ids, the rest into fold.train_ids.
void CarveValidation(const std::vector<std::string> &pool, uint64_t seed,
                     Fold *fold) {
  std::vector<size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(order);
  std::vector<char> is_val(pool.size(), 0);
  size_t k = ValidationCount(pool.size());
  for (size_t i = 0; i < k; ++i) is_val[order[i]] = 1;
  for (size_t i = 0; i < pool.size(); ++i)
    (is_val[i] ? fold->validation_ids : fold->train_ids).push_back(pool[i]);
}

}  // namespace

const char *ToString(Emotion e) { return kEmotionNames[static_cast<int>(e)]; }
const char *ToString(Gender g) { return kGenderNames[static_cast<int>(g)]; }
const char *ToString(Naturalness n) {
  return kNaturalnessNames[static_cast<int>(n)];
}
const char *ToString(FoldMode m) {
  switch (m) {
    case FoldMode::kLoso: return "LOSO";
    case FoldMode::kLoco: return "LOCO";
    case FoldMode::kStratified: return "STRATIFIED";
  }
  return "?";
}

Emotion ParseEmotion(const std::string &s) {
  return ParseLabel<Emotion>(s, kEmotionNames, "emotion");
}
Gender ParseGender(const std::string &s) {
  return ParseLabel<Gender>(s, kGenderNames, "gender");
}
Naturalness ParseNaturalness(const std::string &s) {
  return ParseLabel<Naturalness>(s, kNaturalnessNames, "naturalness");
}

std::filesystem::path CorpusManifest::ResolveAudio(const UtteranceRecord &r) const {
  std::filesystem::path p(r.audio_path);
  return p.is_absolute() ? p : root / p;
}

const UtteranceRecord *CorpusManifest::Find(const std::string &id) const {
  for (const auto &r : records)
    if (r.utterance_id == id) return &r;
  return nullptr;
}

std::map<CorpusManifest::CountKey, int> CorpusManifest::LabelCounts() const {
  std::map<CountKey, int> counts;
  for (const auto &r : records)
    ++counts[{r.corpus_id, r.emotion, r.gender, r.naturalness}];
  return counts;
}

std::vector<CorpusSummary> CorpusManifest::Summaries() const {
  std::vector<CorpusSummary> out;
  std::map<std::string, size_t> index;
  std::vector<std::set<std::string>> speakers;
  for (const auto &r : records) {
    auto [it, inserted] = index.emplace(r.corpus_id, out.size());
    if (inserted) {
      out.push_back({});
      out.back().corpus_id = r.corpus_id;
      speakers.emplace_back();
    }
    CorpusSummary &s = out[it->second];
    speakers[it->second].insert(r.speaker_id);
    ++s.emotion[static_cast<int>(r.emotion)];
    ++(IsFemale(r.gender) ? s.female : s.male);
    ++(r.naturalness == Naturalness::kNatural ? s.natural : s.acted);
    ++s.total;
  }
  for (size_t i = 0; i < out.size(); ++i)
    out[i].speakers = static_cast<int>(speakers[i].size());
  return out;
}

void ValidateManifest(const CorpusManifest &m) {
  if (m.records.empty()) Fail(ErrorCode::kInvalidArgument, "manifest is empty");
  std::unordered_set<std::string> seen;
  for (const auto &r : m.records) {
    if (r.utterance_id.empty() || r.speaker_id.empty() || r.corpus_id.empty() ||
        r.audio_path.empty())
      Fail(ErrorCode::kParse, "record '" + r.utterance_id + "' has an empty field");
    if (!seen.insert(r.utterance_id).second)
      Fail(ErrorCode::kInvalidArgument, "duplicate utterance_id '" + r.utterance_id + "'");
  }
}

CorpusManifest LoadManifest(const std::filesystem::path &path, bool check_audio) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kIo, "cannot open manifest " + path.string());
  CorpusManifest m;
  m.root = path.parent_path();

  std::string line;
  if (!std::getline(is, line)) Fail(ErrorCode::kParse, "manifest has no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Tolerate a UTF-8 byte-order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  auto header = SplitCsvLine(line);
  const std::vector<std::string> required = SplitCsvLine(kManifestHeader);
  for (const auto &col : required)
    if (std::find(header.begin(), header.end(), col) == header.end())
      Fail(ErrorCode::kParse, "manifest is missing column '" + col + "'");
  if (header != required)
    Fail(ErrorCode::kParse, std::string("manifest header must be exactly: ") + kManifestHeader);

  size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = SplitCsvLine(line);
    if (f.size() != required.size())
      Fail(ErrorCode::kParse, "manifest line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(required.size()) + " fields");
    UtteranceRecord r;
    r.utterance_id = f[0];
    r.audio_path = f[1];
    r.emotion = ParseEmotion(f[2]);
    r.gender = ParseGender(f[3]);
    r.naturalness = ParseNaturalness(f[4]);
    r.speaker_id = f[5];
    r.corpus_id = f[6];
    m.records.push_back(std::move(r));
  }
  ValidateManifest(m);
  if (check_audio) {
    for (const auto &r : m.records) {
      std::error_code ec;
      auto p = m.ResolveAudio(r);
      if (!std::filesystem::is_regular_file(p, ec))
        Fail(ErrorCode::kIo, "unreadable audio path '" + p.string() + "' for '" +
                                 r.utterance_id + "'");
    }
  }
  return m;
}

void WriteManifest(const CorpusManifest &m, const std::filesystem::path &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorCode::kIo, "cannot write manifest " + path.string());
  os << kManifestHeader << '\n';
  for (const auto &r : m.records) {
    os << r.utterance_id << ',' << r.audio_path << ',' << ToString(r.emotion) << ','
       << ToString(r.gender) << ',' << ToString(r.naturalness) << ',' << r.speaker_id
       << ',' << r.corpus_id << '\n';
  }
  if (!os) Fail(ErrorCode::kIo, "short write to " + path.string());
}

void SynthConfig::Validate() const {
  if (n_corpora < 1 || speakers_per_corpus < 1 || utterances_per_speaker < 1)
    Fail(ErrorCode::kInvalidArgument, "synthetic corpus counts must all be >= 1");
  if (!(duration_s >= 0.5))
    Fail(ErrorCode::kInvalidArgument, "synthetic duration must be >= 0.5 s");
  if (class_balance) {
    double sum = 0;
    for (double p : *class_balance) {
      if (!(p >= 0)) Fail(ErrorCode::kInvalidArgument, "class_balance entries must be >= 0");
      sum += p;
    }
    if (!(sum > 0)) Fail(ErrorCode::kInvalidArgument, "class_balance must have positive mass");
  }
}

std::string GroupOf(const UtteranceRecord &r, GroupKey key,
                    const std::vector<CorpusManifest> &manifests) {
  if (key == GroupKey::kCorpus) return r.corpus_id;
  bool natural = false, acted = false;
  for (const auto &m : manifests)
    for (const auto &o : m.records)
      if (o.corpus_id == r.corpus_id)
        (o.naturalness == Naturalness::kNatural ? natural : acted) = true;
  if (natural && acted)
    return r.corpus_id + (r.naturalness == Naturalness::kNatural ? "N" : "A");
  return r.corpus_id;
}

FoldPlan MakeFolds(const std::vector<CorpusManifest> &manifests, FoldMode mode,
                   uint64_t seed, GroupKey key) {
  if (manifests.empty()) Fail(ErrorCode::kInvalidArgument, "no manifests given");
  for (const auto &m : manifests) ValidateManifest(m);
  CheckDistinctSpeakers(manifests);

  FoldPlan plan;
  plan.mode = mode;
  std::vector<const UtteranceRecord *> all;
  for (const auto &m : manifests)
    for (const auto &r : m.records) all.push_back(&r);

  std::vector<std::string> group_of(all.size());
  std::vector<std::string> groups;  // in order of first appearance
  if (mode == FoldMode::kLoso) {
    if (manifests.size() != 1)
      Fail(ErrorCode::kInvalidArgument, "LOSO takes exactly one manifest");
    for (size_t i = 0; i < all.size(); ++i) group_of[i] = all[i]->speaker_id;
  } else if (mode == FoldMode::kLoco) {
    // Precompute which corpora mix natural and acted speech.
    std::map<std::string, std::pair<bool, bool>> mix;
    for (auto *r : all) {
      auto &e = mix[r->corpus_id];
      (r->naturalness == Naturalness::kNatural ? e.first : e.second) = true;
    }
    for (size_t i = 0; i < all.size(); ++i) {
      const auto &r = *all[i];
      auto [nat, act] = mix[r.corpus_id];
      group_of[i] = (key == GroupKey::kCorpusNaturalness && nat && act)
                        ? r.corpus_id + (r.naturalness == Naturalness::kNatural ? "N" : "A")
                        : r.corpus_id;
    }
  } else {
    Fail(ErrorCode::kInvalidArgument, "MakeFolds supports LOSO and LOCO only");
  }
  for (const auto &g : group_of)
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  if (mode == FoldMode::kLoco && groups.size() < 2)
    Fail(ErrorCode::kInvalidArgument, "LOCO needs at least two corpus groups");
  if (mode == FoldMode::kLoso && groups.size() < 2)
    Fail(ErrorCode::kInvalidArgument, "LOSO needs at least two speakers");

  for (size_t gi = 0; gi < groups.size(); ++gi) {
    Fold fold;
    fold.test_group = groups[gi];
    if (mode == FoldMode::kLoco)
      for (size_t o = 0; o < groups.size(); ++o)
        if (o != gi) fold.train_groups.push_back(groups[o]);
    std::vector<std::string> pool;
    for (size_t i = 0; i < all.size(); ++i)
      (group_of[i] == groups[gi] ? fold.test_ids : pool).push_back(all[i]->utterance_id);
    CarveValidation(pool, DeriveSeed(seed, "validation", gi), &fold);
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

FoldPlan StratifiedSplit(const std::vector<CorpusManifest> &manifests,
                         std::array<double, 3> fractions, uint64_t seed) {
  double sum = 0;
  for (double f : fractions) {
    if (!(f >= 0)) Fail(ErrorCode::kInvalidArgument, "split fractions must be >= 0");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    Fail(ErrorCode::kInvalidArgument, "split fractions must sum to 1");
  for (const auto &m : manifests) ValidateManifest(m);
  CheckDistinctSpeakers(manifests);

  std::vector<const UtteranceRecord *> all;
  for (const auto &m : manifests)
    for (const auto &r : m.records) all.push_back(&r);
  if (all.size() < 10)
    Fail(ErrorCode::kInvalidArgument, "stratified split needs at least 10 utterances");

  Rng rng(DeriveSeed(seed, "stratified"));
  rng.Shuffle(all);
  // Deal the shuffled utterances class by class, always to the partition
  // furthest behind its running quota. Each class then lands in every
  // partition in proportion up to a single utterance, and the totals match
  // the fractions up to rounding.
  std::stable_sort(all.begin(), all.end(), [](auto *a, auto *b) {
    return static_cast<int>(a->emotion) < static_cast<int>(b->emotion);
  });
  std::array<std::vector<const UtteranceRecord *>, 3> parts;
  std::array<double, 3> assigned{};
  for (size_t i = 0; i < all.size(); ++i) {
    size_t best = 0;
    double best_deficit = -1e300;
    for (size_t p = 0; p < 3; ++p) {
      double deficit = fractions[p] * static_cast<double>(i + 1) - assigned[p];
      if (fractions[p] > 0 && deficit > best_deficit + 1e-12) {
        best_deficit = deficit;
        best = p;
      }
    }
    parts[best].push_back(all[i]);
    assigned[best] += 1.0;
  }
  FoldPlan plan;
  plan.mode = FoldMode::kStratified;
  Fold fold;
  fold.test_group = "aggregated";
  std::array<std::vector<std::string> *, 3> dst = {&fold.train_ids, &fold.validation_ids,
                                                   &fold.test_ids};
  for (size_t p = 0; p < 3; ++p) {
    Rng part_rng(DeriveSeed(seed, "stratified-order", p));
    part_rng.Shuffle(parts[p]);
    for (auto *r : parts[p]) dst[p]->push_back(r->utterance_id);
  }
  plan.folds.push_back(std::move(fold));
  return plan;
}

}  // namespace pmtl
