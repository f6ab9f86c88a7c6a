// src/config.cc

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

#include "config.h"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "common.h"

namespace pmtl {

const char *ToString(Protocol p) {
  switch (p) {
    case Protocol::kWithin: return "within";
    case Protocol::kCross: return "cross";
    case Protocol::kAggregated: return "aggregated";
  }
  return "?";
}

Protocol ParseProtocol(const std::string &s) {
  if (s == "within") return Protocol::kWithin;
  if (s == "cross") return Protocol::kCross;
  if (s == "aggregated") return Protocol::kAggregated;
  Fail(ErrorCode::kParse, "unknown protocol '" + s + "'");
}

const char *ToString(GroupKey k) {
  return k == GroupKey::kCorpus ? "corpus" : "corpus_naturalness";
}

GroupKey ParseGroupKey(const std::string &s) {
  if (s == "corpus") return GroupKey::kCorpus;
  if (s == "corpus_naturalness") return GroupKey::kCorpusNaturalness;
  Fail(ErrorCode::kParse, "unknown group key '" + s + "'");
}

namespace {

// Reads the keys of one JSON object and rejects any it was not asked for.
class Fields {
 public:
  Fields(const Json &j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j.is_object()) Fail(ErrorCode::kParse, what_ + " must be a JSON object");
  }

  bool Has(const char *key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const Json &Raw(const char *key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  void Get(const char *key, T *out) {
    if (!Has(key)) return;
    const Json &v = j_.at(key);
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_unsigned()) Bad(key, "expected a non-negative integer");
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer()) Bad(key, "expected an integer");
    }
    try {
      *out = v.get<T>();
    } catch (const nlohmann::json::exception &e) {
      Bad(key, e.what());
    }
  }

  void Finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        Fail(ErrorCode::kParse, "unknown key '" + it.key() + "' in " + what_);
  }

  [[noreturn]] void Bad(const std::string &key, const std::string &msg) const {
    Fail(ErrorCode::kParse, what_ + "." + key + ": " + msg);
  }

 private:
  const Json &j_;
  std::string what_;
  std::set<std::string> seen_;
};

}  // namespace

Json ToJson(const FeatureConfig &c) {
  return {{"window_ms", c.window_ms},       {"hop_ms", c.hop_ms},
          {"n_mfcc", c.n_mfcc},             {"n_mel_filters", c.n_mel_filters},
          {"fft_size", c.fft_size},         {"pre_emphasis", c.pre_emphasis},
          {"f0_min_hz", c.f0_min_hz},       {"f0_max_hz", c.f0_max_hz},
          {"delta_window", c.delta_window}, {"voicing_threshold", c.voicing_threshold}};
}

void FromJson(const Json &j, FeatureConfig *c) {
  Fields f(j, "features");
  f.Get("window_ms", &c->window_ms);
  f.Get("hop_ms", &c->hop_ms);
  f.Get("n_mfcc", &c->n_mfcc);
  f.Get("n_mel_filters", &c->n_mel_filters);
  f.Get("fft_size", &c->fft_size);
  f.Get("pre_emphasis", &c->pre_emphasis);
  f.Get("f0_min_hz", &c->f0_min_hz);
  f.Get("f0_max_hz", &c->f0_max_hz);
  f.Get("delta_window", &c->delta_window);
  f.Get("voicing_threshold", &c->voicing_threshold);
  f.Finish();
}

Json ToJson(const MtlNetworkConfig &c) {
  return {{"trunk", ToString(c.trunk)},
          {"layer_sizes", c.layer_sizes},
          {"context_frames", c.context_frames},
          {"subtasks", ToString(c.subtasks)},
          {"lambda_gender", c.lambda_gender},
          {"lambda_naturalness", c.lambda_naturalness}};
}

void FromJson(const Json &j, MtlNetworkConfig *c) {
  Fields f(j, "network");
  if (f.Has("trunk")) {
    std::string t;
    f.Get("trunk", &t);
    MtlNetworkConfig d = MtlNetworkConfig::Defaults(ParseTrunk(t));
    c->trunk = d.trunk;
    c->layer_sizes = d.layer_sizes;
    c->context_frames = d.context_frames;
  }
  f.Get("layer_sizes", &c->layer_sizes);
  f.Get("context_frames", &c->context_frames);
  if (f.Has("subtasks")) {
    std::string s;
    f.Get("subtasks", &s);
    c->subtasks = ParseSubtasks(s);
  }
  f.Get("lambda_gender", &c->lambda_gender);
  f.Get("lambda_naturalness", &c->lambda_naturalness);
  f.Finish();
}

Json ToJson(const TrainConfig &c) {
  return {{"batch_size", c.batch_size}, {"lr", c.lr},
          {"dropout_p", c.dropout_p},   {"max_epochs", c.max_epochs},
          {"patience", c.patience},     {"seed", c.seed},
          {"lstm_chunk_frames", c.lstm_chunk_frames}, {"clip_norm", c.clip_norm}};
}

void FromJson(const Json &j, TrainConfig *c) {
  Fields f(j, "train");
  f.Get("batch_size", &c->batch_size);
  f.Get("lr", &c->lr);
  f.Get("dropout_p", &c->dropout_p);
  f.Get("max_epochs", &c->max_epochs);
  f.Get("patience", &c->patience);
  f.Get("seed", &c->seed);
  f.Get("lstm_chunk_frames", &c->lstm_chunk_frames);
  f.Get("clip_norm", &c->clip_norm);
  f.Finish();
}

Json ToJson(const ElmConfig &c) {
  return {{"n_hidden", c.n_hidden}, {"ridge", c.ridge}, {"seed", c.seed}};
}

void FromJson(const Json &j, ElmConfig *c) {
  Fields f(j, "elm");
  f.Get("n_hidden", &c->n_hidden);
  f.Get("ridge", &c->ridge);
  f.Get("seed", &c->seed);
  f.Finish();
}

Json ToJson(const TsneConfig &c) {
  return {{"perplexity", c.perplexity},
          {"n_iter", c.n_iter},
          {"learning_rate", c.learning_rate},
          {"early_exaggeration", c.early_exaggeration},
          {"exaggeration_iters", c.exaggeration_iters},
          {"initial_momentum", c.initial_momentum},
          {"final_momentum", c.final_momentum},
          {"momentum_switch_iter", c.momentum_switch_iter},
          {"out_dims", c.out_dims},
          {"seed", c.seed}};
}

void FromJson(const Json &j, TsneConfig *c) {
  Fields f(j, "tsne");
  f.Get("perplexity", &c->perplexity);
  f.Get("n_iter", &c->n_iter);
  f.Get("learning_rate", &c->learning_rate);
  f.Get("early_exaggeration", &c->early_exaggeration);
  f.Get("exaggeration_iters", &c->exaggeration_iters);
  f.Get("initial_momentum", &c->initial_momentum);
  f.Get("final_momentum", &c->final_momentum);
  f.Get("momentum_switch_iter", &c->momentum_switch_iter);
  f.Get("out_dims", &c->out_dims);
  f.Get("seed", &c->seed);
  f.Finish();
}

Json ToJson(const SynthConfig &c) {
  Json j = {{"n_corpora", c.n_corpora},
            {"speakers_per_corpus", c.speakers_per_corpus},
            {"utterances_per_speaker", c.utterances_per_speaker},
            {"duration_s", c.duration_s},
            {"seed", c.seed}};
  if (c.class_balance) j["class_balance"] = *c.class_balance;
  return j;
}

void FromJson(const Json &j, SynthConfig *c) {
  Fields f(j, "synth");
  f.Get("n_corpora", &c->n_corpora);
  f.Get("speakers_per_corpus", &c->speakers_per_corpus);
  f.Get("utterances_per_speaker", &c->utterances_per_speaker);
  f.Get("duration_s", &c->duration_s);
  f.Get("seed", &c->seed);
  if (f.Has("class_balance")) {
    const Json &v = f.Raw("class_balance");
    if (v.is_null()) {
      c->class_balance.reset();
    } else {
      std::array<double, kNumEmotions> b{};
      f.Get("class_balance", &b);
      c->class_balance = b;
    }
  }
  f.Finish();
}

void RunConfig::Validate() const {
  features.Validate(kSampleRate);
  network.Validate();
  train.Validate();
  elm.Validate();
  if (!(hlf_theta > 0 && hlf_theta < 1)) Fail(ErrorCode::kInvalidArgument, "hlf_theta must lie in (0, 1)");
  if (jobs < 1) Fail(ErrorCode::kInvalidArgument, "jobs must be >= 1");
  if (synth) synth->Validate();
}

Json ToJson(const RunConfig &c) {
  Json train = ToJson(c.train), elm = ToJson(c.elm), tsne = ToJson(c.tsne);
  train.erase("seed");
  elm.erase("seed");
  tsne.erase("seed");
  Json j = {{"seed", c.seed},
            {"protocol", ToString(c.protocol)},
            {"group_key", ToString(c.group_key)},
            {"manifests", c.manifests},
            {"corpus", c.corpus},
            {"grid", c.grid},
            {"jobs", c.jobs},
            {"features", ToJson(c.features)},
            {"network", ToJson(c.network)},
            {"train", train},
            {"elm", elm},
            {"hlf_theta", c.hlf_theta},
            {"tsne", tsne}};
  if (c.synth) j["synth"] = ToJson(*c.synth);
  return j;
}

void FromJson(const Json &j, RunConfig *c) {
  Fields f(j, "run config");
  f.Get("seed", &c->seed);
  std::string name;
  if (f.Has("protocol")) {
    f.Get("protocol", &name);
    c->protocol = ParseProtocol(name);
  }
  if (f.Has("group_key")) {
    f.Get("group_key", &name);
    c->group_key = ParseGroupKey(name);
  }
  f.Get("manifests", &c->manifests);
  f.Get("corpus", &c->corpus);
  f.Get("grid", &c->grid);
  f.Get("jobs", &c->jobs);
  if (f.Has("synth")) {
    SynthConfig s = c->synth.value_or(SynthConfig{});
    FromJson(f.Raw("synth"), &s);
    c->synth = s;
  }
  if (f.Has("features")) FromJson(f.Raw("features"), &c->features);
  if (f.Has("network")) FromJson(f.Raw("network"), &c->network);
  if (f.Has("train")) FromJson(f.Raw("train"), &c->train);
  if (f.Has("elm")) FromJson(f.Raw("elm"), &c->elm);
  f.Get("hlf_theta", &c->hlf_theta);
  if (f.Has("tsne")) FromJson(f.Raw("tsne"), &c->tsne);
  f.Finish();
}

Json ParseJson(const std::string &text, const std::string &what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorCode::kParse, what + ": " + e.what());
  }
}

Json ReadJsonFile(const std::string &path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kIo, "cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ParseJson(ss.str(), path);
}

void WriteJsonFile(const std::string &path, const Json &j) {
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kIo, "cannot write " + path);
  os << j.dump(2) << '\n';
  if (!os) Fail(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace pmtl
