// src/pipeline.cc

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

#include "pipeline.h"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "common.h"
#include "wav.h"

namespace pmtl {

namespace fs = std::filesystem;

namespace {

void MakeDir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    Fail(ErrorCode::kIo, "cannot create directory " + dir.string());
}

std::string SafeName(const std::string &id) {
  std::string s = id;
  for (char &c : s)
    if (c == '/' || c == '\\' || c == ':') c = '_';
  return s;
}

std::vector<const UtteranceRecord *> AllRecords(const std::vector<CorpusManifest> &ms) {
  std::vector<const UtteranceRecord *> out;
  for (const auto &m : ms)
    for (const auto &r : m.records) out.push_back(&r);
  return out;
}

HlfRow MakeHlfRow(const UtteranceRecord &r, const HighLevelFeatureVector &v,
                  const std::string &partition) {
  HlfRow row;
  row.utterance_id = r.utterance_id;
  row.hlf = v;
  row.emotion = r.emotion;
  row.gender = r.gender;
  row.naturalness = r.naturalness;
  row.speaker_id = r.speaker_id;
  row.corpus_id = r.corpus_id;
  row.partition = partition;
  return row;
}

nn::Matrix HlfMatrix(const std::vector<const HlfRow *> &rows) {
  nn::Matrix x(static_cast<int64_t>(rows.size()), kHlfDim);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < kHlfDim; ++k) x(i, k) = rows[i]->hlf.values[k];
  return x;
}

}  // namespace

std::vector<CorpusManifest> LoadRunManifests(const RunConfig &config) {
  if (config.manifests.empty()) Fail(ErrorCode::kInvalidArgument, "no manifest given");
  std::vector<CorpusManifest> out;
  for (const auto &p : config.manifests) {
    CorpusManifest m = LoadManifest(p);
    if (!config.corpus.empty()) {
      std::erase_if(m.records, [&](const UtteranceRecord &r) { return r.corpus_id != config.corpus; });
      if (m.records.empty()) continue;
    }
    out.push_back(std::move(m));
  }
  if (out.empty())
    Fail(ErrorCode::kInvalidArgument, "no utterances of corpus '" + config.corpus + "'");
  return out;
}

CorpusManifest SynthStage(const SynthConfig &config, const fs::path &out_dir) {
  config.Validate();
  MakeDir(out_dir);
  CorpusManifest m = GenerateSynthetic(config, out_dir);
  WriteJsonFile((out_dir / "config.json").string(), Json{{"synth", ToJson(config)}});
  return m;
}

int FeaturesStage(const RunConfig &config, const fs::path &out_dir, bool csv) {
  config.features.Validate(kSampleRate);
  const auto manifests = LoadRunManifests(config);
  FeatureStore store = FeatureStore::Extract(manifests, config.features, config.jobs);
  MakeDir(out_dir);
  std::ofstream index(out_dir / "index.csv");
  if (!index) Fail(ErrorCode::kIo, "cannot write " + (out_dir / "index.csv").string());
  index << "utterance_id,feature_path,frames\n";
  int n = 0;
  for (const auto *r : AllRecords(manifests)) {
    const auto &f = store.features(r->utterance_id);
    const std::string base = SafeName(r->utterance_id);
    WriteFeatureFile(out_dir / (base + ".pmtl"), f);
    if (csv) WriteFeatureCsv(out_dir / (base + ".csv"), f);
    index << r->utterance_id << ',' << base << ".pmtl," << f.frames() << '\n';
    ++n;
  }
  RunConfig resolved = config;
  WriteJsonFile((out_dir / "config.json").string(), ToJson(resolved));
  return n;
}

TrainedModel TrainStage(const RunConfig &config, const fs::path &out_dir) {
  config.Validate();
  const auto manifests = LoadRunManifests(config);
  FeatureStore store = FeatureStore::Extract(manifests, config.features, config.jobs);
  std::vector<std::string> ids;
  for (const auto *r : AllRecords(manifests)) ids.push_back(r->utterance_id);
  if (ids.size() < 2) Fail(ErrorCode::kInvalidArgument, "training needs at least 2 utterances");
  Rng rng(DeriveSeed(config.seed, "validation"));
  rng.Shuffle(ids);
  size_t n_val = static_cast<size_t>(std::lround(kValidationFraction * ids.size()));
  n_val = std::clamp<size_t>(n_val, 1, ids.size() - 1);
  std::vector<std::string> val(ids.begin(), ids.begin() + n_val);
  std::vector<std::string> train(ids.begin() + n_val, ids.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  auto seqs = [&](const std::vector<std::string> &v) {
    std::vector<LabeledSequence> out;
    for (const auto &id : v) {
      const auto &r = store.record(id);
      out.push_back({&store.features(id), r.emotion, r.gender, r.naturalness});
    }
    return out;
  };
  TrainConfig tc = config.train;
  tc.seed = DeriveSeed(config.seed, "train");
  TrainedModel m = Train(config.network, seqs(train), seqs(val), tc, DeriveSeed(config.seed, "init"));
  MakeDir(out_dir);
  WriteJsonFile((out_dir / "config.json").string(), ToJson(config));
  WriteHistoryCsv(m, out_dir / "history.csv");
  SaveModel(m, out_dir / "model.ckpt");
  return m;
}

std::vector<HlfRow> HlfStage(const RunConfig &config, const fs::path &model_path,
                             const fs::path &out_csv) {
  const TrainedModel model = LoadModel(model_path);
  const auto manifests = LoadRunManifests(config);
  FeatureStore store = FeatureStore::Extract(manifests, config.features, config.jobs);
  std::vector<HlfRow> rows;
  for (const auto *r : AllRecords(manifests)) {
    auto post = EmotionPosteriors(model, store.features(r->utterance_id));
    rows.push_back(MakeHlfRow(*r, ComputeHlf(post, config.hlf_theta), ""));
  }
  if (out_csv.has_parent_path()) MakeDir(out_csv.parent_path());
  WriteHlfCsv(out_csv, rows);
  return rows;
}

ElmStageResult ElmStage(const fs::path &train_csv, const fs::path &test_csv,
                        const ElmConfig &config, uint64_t seed, const fs::path &out_dir) {
  const auto first = ReadHlfCsv(train_csv);
  std::vector<HlfRow> second;
  std::vector<const HlfRow *> fit, score;
  if (!test_csv.empty()) {
    second = ReadHlfCsv(test_csv);
    for (const auto &r : first) fit.push_back(&r);
    for (const auto &r : second) score.push_back(&r);
  } else {
    for (const auto &r : first) (r.partition == "test" ? score : fit).push_back(&r);
    if (score.empty()) score = fit;
  }
  if (fit.empty() || score.empty()) Fail(ErrorCode::kInvalidArgument, "empty HLF table");
  nn::Matrix y = nn::Matrix::Zero(static_cast<int64_t>(fit.size()), kNumEmotions);
  for (size_t i = 0; i < fit.size(); ++i) y(i, static_cast<int>(fit[i]->emotion)) = 1.0;
  ElmConfig ec = config;
  ec.seed = DeriveSeed(seed, "elm");
  ElmModel model = ElmFit(HlfMatrix(fit), y, ec);
  ElmPrediction pred = ElmPredict(model, HlfMatrix(score));

  ElmStageResult res;
  std::vector<int> truth;
  for (const auto *r : score) truth.push_back(static_cast<int>(r->emotion));
  res.confusion = MakeConfusionMatrix(pred.labels, truth);
  res.ua = UnweightedAccuracy(res.confusion);
  res.n_train = static_cast<int>(fit.size());
  res.n_test = static_cast<int>(score.size());

  MakeDir(out_dir);
  SaveElm(model, out_dir / "elm.ckpt");
  std::ofstream os(out_dir / "predictions.csv");
  if (!os) Fail(ErrorCode::kIo, "cannot write predictions.csv");
  os.precision(10);
  os << "utterance_id,true,predicted,score_neutral,score_happy,score_sad,score_angry\n";
  for (size_t i = 0; i < score.size(); ++i) {
    os << score[i]->utterance_id << ',' << ToString(score[i]->emotion) << ','
       << ToString(static_cast<Emotion>(pred.labels[i]));
    for (int k = 0; k < kNumEmotions; ++k) os << ',' << pred.scores(i, k);
    os << '\n';
  }
  Json cm = Json::array();
  for (const auto &row : res.confusion.counts) cm.push_back(row);
  Json recall = Json::array();
  for (int k = 0; k < kNumEmotions; ++k) {
    double r = res.confusion.Recall(k);
    recall.push_back(r < 0 ? Json(nullptr) : Json(r));
  }
  WriteJsonFile((out_dir / "metrics.json").string(),
                {{"ua", res.ua}, {"recall", recall}, {"confusion", cm},
                 {"n_train", res.n_train}, {"n_test", res.n_test}});
  Json cfg = ToJson(config);
  cfg.erase("seed");
  WriteJsonFile((out_dir / "config.json").string(),
                {{"seed", seed}, {"elm", cfg}, {"train", train_csv.string()},
                 {"test", test_csv.string()}});
  return res;
}

XvalResult XvalStage(const RunConfig &config, const fs::path &out_dir) {
  config.Validate();
  const auto manifests = LoadRunManifests(config);
  const FoldPlan plan = PlanFolds(config.protocol, manifests, config.seed, config.group_key);
  FeatureStore store = FeatureStore::Extract(manifests, config.features, config.jobs);
  PipelineConfig base;
  base.network = config.network;
  base.train = config.train;
  base.elm = config.elm;
  base.hlf_theta = config.hlf_theta;
  base.name = ConfigName(config.network.trunk, config.network.subtasks);
  const std::vector<PipelineConfig> configs =
      config.grid ? GridConfigs(base) : std::vector<PipelineConfig>{base};

  MakeDir(out_dir);
  const Json cfg_json = ToJson(config);
  WriteJsonFile((out_dir / "config.json").string(), cfg_json);

  XvalResult out;
  for (const auto &pc : configs) {
    std::vector<FoldArtifacts> arts;
    ExperimentReport rep =
        RunExperiment(config.protocol, store, plan, pc, config.seed, config.jobs, &arts);
    const fs::path dir = config.grid ? out_dir / pc.name : out_dir;
    WriteReportFiles(rep, dir, cfg_json);
    std::vector<HlfRow> hlf;
    for (size_t f = 0; f < arts.size(); ++f) {
      if (!rep.folds[f].complete) continue;
      char name[32];
      std::snprintf(name, sizeof(name), "fold_%02zu", f);
      const fs::path fd = dir / name;
      MakeDir(fd);
      WriteHistoryCsv(arts[f].model, fd / "history.csv");
      SaveModel(arts[f].model, fd / "model.ckpt");
      SaveElm(arts[f].elm, fd / "elm.ckpt");
      hlf.insert(hlf.end(), arts[f].hlf.begin(), arts[f].hlf.end());
    }
    std::sort(hlf.begin(), hlf.end(), [](const HlfRow &a, const HlfRow &b) {
      return a.utterance_id < b.utterance_id;
    });
    WriteHlfCsv(dir / "hlf.csv", hlf);
    out.reports.push_back(std::move(rep));
  }
  if (config.grid) {
    out.table = BuildTable(out.reports, GridBaselines());
    WriteTableFiles(out.table, out_dir);
  }
  return out;
}

TsneResult EmbedStage(const fs::path &hlf_csv, const TsneConfig &config, const fs::path &out_dir) {
  const auto rows = ReadHlfCsv(hlf_csv);
  if (rows.empty()) Fail(ErrorCode::kInvalidArgument, "empty HLF table");
  std::vector<const HlfRow *> ptrs;
  for (const auto &r : rows) ptrs.push_back(&r);
  TsneResult res = TsneEmbed(HlfMatrix(ptrs), config);
  std::vector<EmbeddingRow> meta;
  for (const auto &r : rows)
    meta.push_back({r.utterance_id, ToString(r.emotion), ToString(r.gender),
                    ToString(r.naturalness), r.corpus_id});
  MakeDir(out_dir);
  WriteEmbeddingCsv(out_dir / "embedding.csv", res.embedding, meta);
  if (res.embedding.cols() == 2) WriteEmbeddingSvg(out_dir / "embedding.svg", res.embedding, meta);
  std::ofstream kl(out_dir / "kl_trace.csv");
  if (!kl) Fail(ErrorCode::kIo, "cannot write kl_trace.csv");
  kl.precision(12);
  kl << "iteration,kl\n";
  for (size_t i = 0; i < res.kl_trace.size(); ++i) kl << i + 1 << ',' << res.kl_trace[i] << '\n';
  WriteJsonFile((out_dir / "config.json").string(),
                {{"input", hlf_csv.string()}, {"tsne", ToJson(config)}});
  return res;
}

ResultTable ReportStage(const std::vector<fs::path> &run_dirs, const fs::path &out_dir) {
  if (run_dirs.empty()) Fail(ErrorCode::kInvalidArgument, "no runs given");
  std::vector<ExperimentReport> reports;
  std::vector<int> baselines;
  for (const auto &d : run_dirs) {
    reports.push_back(ReportFromJson(ReadJsonFile((d / "report.json").string())));
    baselines.push_back(reports.size() == 1 ? -1 : 0);
  }
  // Columns must be distinguishable even when two runs share a config name.
  for (size_t i = 0; i < reports.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      if (reports[i].name == reports[j].name) {
        reports[i].name += "#" + std::to_string(i);
        break;
      }
  ResultTable t = BuildTable(reports, baselines);
  WriteTableFiles(t, out_dir);
  return t;
}

}  // namespace pmtl
