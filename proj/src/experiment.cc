// src/experiment.cc

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

#include "experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "common.h"
#include "wav.h"

namespace pmtl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs task(i) for i in [0, n) on up to `jobs` threads.
template <typename F>
void ParallelFor(int n, int jobs, F task) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) task(i);
    });
  for (auto &th : pool) th.join();
}

std::string KindOf(const std::vector<const UtteranceRecord *> &recs) {
  bool natural = false, acted = false;
  for (const auto *r : recs) (r->naturalness == Naturalness::kNatural ? natural : acted) = true;
  if (natural && !acted) return "natural";
  if (acted && !natural) return "acted";
  return "mixed";
}

std::string JoinGroups(const std::vector<std::string> &g) {
  if (g.empty()) return "";
  std::string s = "{";
  for (size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + g[i];
  return s + "}";
}

double MeanOf(const std::vector<double> &v) {
  double s = 0;
  int n = 0;
  for (double x : v)
    if (!std::isnan(x)) {
      s += x;
      ++n;
    }
  return n ? s / n : kNaN;
}

Json NumberOrNull(double x) { return std::isnan(x) ? Json(nullptr) : Json(x); }
double NumberFrom(const Json &j) { return j.is_null() ? kNaN : j.get<double>(); }

void RunFold(int index, const Fold &fold, Protocol protocol, const FeatureStore &store,
             const PipelineConfig &config, uint64_t seed, FoldResult *res,
             FoldArtifacts *art) {
  res->index = index;
  res->test_group = fold.test_group;
  res->train_groups = fold.train_groups;
  res->n_train = static_cast<int>(fold.train_ids.size());
  res->n_validation = static_cast<int>(fold.validation_ids.size());
  res->n_test = static_cast<int>(fold.test_ids.size());
  std::vector<const UtteranceRecord *> test_recs;
  for (const auto &id : fold.test_ids) test_recs.push_back(&store.record(id));
  res->test_kind = KindOf(test_recs);

  const uint64_t fold_seed = DeriveSeed(seed, "fold", static_cast<uint64_t>(index));
  auto sequences = [&](const std::vector<std::string> &ids) {
    std::vector<LabeledSequence> out;
    for (const auto &id : ids) {
      const auto &r = store.record(id);
      out.push_back({&store.features(id), r.emotion, r.gender, r.naturalness});
    }
    return out;
  };
  const auto train = sequences(fold.train_ids);
  const auto validation = sequences(fold.validation_ids);

  TrainConfig tc = config.train;
  tc.seed = DeriveSeed(fold_seed, "train");
  TrainedModel trained = Train(config.network, train, validation, tc, DeriveSeed(fold_seed, "init"));
  res->best_epoch = trained.best_epoch;
  res->epochs_run = static_cast<int>(trained.history.size());

  auto hlf_rows = [&](const std::vector<std::string> &ids, const char *partition) {
    std::vector<HlfRow> rows;
    for (const auto &id : ids) {
      const auto &r = store.record(id);
      HlfRow row;
      row.utterance_id = id;
      row.hlf = ComputeHlf(EmotionPosteriors(trained, store.features(id)), config.hlf_theta);
      row.emotion = r.emotion;
      row.gender = r.gender;
      row.naturalness = r.naturalness;
      row.speaker_id = r.speaker_id;
      row.corpus_id = r.corpus_id;
      row.partition = partition;
      rows.push_back(std::move(row));
    }
    return rows;
  };
  auto to_matrix = [](const std::vector<HlfRow> &rows) {
    nn::Matrix x(static_cast<int64_t>(rows.size()), kHlfDim);
    for (size_t i = 0; i < rows.size(); ++i)
      for (int k = 0; k < kHlfDim; ++k) x(i, k) = rows[i].hlf.values[k];
    return x;
  };

  const auto train_hlf = hlf_rows(fold.train_ids, "train");
  const auto test_hlf = hlf_rows(fold.test_ids, "test");
  nn::Matrix y = nn::Matrix::Zero(static_cast<int64_t>(train_hlf.size()), kNumEmotions);
  for (size_t i = 0; i < train_hlf.size(); ++i) y(i, static_cast<int>(train_hlf[i].emotion)) = 1.0;
  ElmConfig ec = config.elm;
  ec.seed = DeriveSeed(fold_seed, "elm");
  ElmModel elm = ElmFit(to_matrix(train_hlf), y, ec);
  ElmPrediction pred = ElmPredict(elm, to_matrix(test_hlf));

  std::vector<int> truth;
  for (const auto &r : test_hlf) truth.push_back(static_cast<int>(r.emotion));
  res->confusion = MakeConfusionMatrix(pred.labels, truth);
  res->ua = UnweightedAccuracy(res->confusion);
  for (int k = 0; k < kNumEmotions; ++k) res->recall[k] = res->confusion.Recall(k);
  res->complete = true;

  if (art) {
    art->hlf = test_hlf;
    if (protocol == Protocol::kAggregated) {
      std::vector<HlfRow> all = train_hlf;
      auto val = hlf_rows(fold.validation_ids, "validation");
      all.insert(all.end(), val.begin(), val.end());
      all.insert(all.end(), test_hlf.begin(), test_hlf.end());
      std::sort(all.begin(), all.end(),
                [](const HlfRow &a, const HlfRow &b) { return a.utterance_id < b.utterance_id; });
      art->hlf = std::move(all);
    }
    art->model = std::move(trained);
    art->elm = std::move(elm);
  }
}

}  // namespace

FeatureStore FeatureStore::Extract(const std::vector<CorpusManifest> &manifests,
                                   const FeatureConfig &config, int jobs) {
  struct Item {
    const CorpusManifest *m;
    const UtteranceRecord *r;
  };
  std::vector<Item> items;
  for (const auto &m : manifests)
    for (const auto &r : m.records) items.push_back({&m, &r});
  std::vector<FrameFeatureMatrix> feats(items.size());
  std::vector<std::string> errors(items.size());
  ParallelFor(static_cast<int>(items.size()), jobs, [&](int i) {
    try {
      Waveform w = ReadWav(items[i].m->ResolveAudio(*items[i].r));
      feats[i] = ExtractFeatures(w.samples, w.sample_rate, config);
    } catch (const std::exception &e) {
      errors[i] = items[i].r->utterance_id + ": " + e.what();
    }
  });
  FeatureStore store;
  for (size_t i = 0; i < items.size(); ++i) {
    if (!errors[i].empty()) Fail(ErrorCode::kIo, "feature extraction failed for " + errors[i]);
    const std::string &id = items[i].r->utterance_id;
    if (store.records_.count(id))
      Fail(ErrorCode::kInvalidArgument, "utterance id '" + id + "' appears in two manifests");
    store.records_[id] = *items[i].r;
    store.features_[id] = std::move(feats[i]);
  }
  return store;
}

const FrameFeatureMatrix &FeatureStore::features(const std::string &id) const {
  auto it = features_.find(id);
  if (it == features_.end()) Fail(ErrorCode::kInvalidArgument, "no features for utterance " + id);
  return it->second;
}

const UtteranceRecord &FeatureStore::record(const std::string &id) const {
  auto it = records_.find(id);
  if (it == records_.end()) Fail(ErrorCode::kInvalidArgument, "unknown utterance " + id);
  return it->second;
}

std::string ConfigName(TrunkType trunk, SubtaskMode subtasks) {
  std::string t = trunk == TrunkType::kDnn ? "DNN" : "LSTM";
  switch (subtasks) {
    case SubtaskMode::kNone: return t + "-STL";
    case SubtaskMode::kAll: return t + "-ALL";
    case SubtaskMode::kGenderOnly: return t + "-GENDER";
    case SubtaskMode::kNaturalnessOnly: return t + "-NATURALNESS";
  }
  return t;
}

std::vector<PipelineConfig> GridConfigs(const PipelineConfig &base) {
  std::vector<PipelineConfig> out;
  for (SubtaskMode s : {SubtaskMode::kNone, SubtaskMode::kAll, SubtaskMode::kGenderOnly,
                        SubtaskMode::kNaturalnessOnly}) {
    for (TrunkType t : {TrunkType::kDnn, TrunkType::kLstm}) {
      PipelineConfig c = base;
      c.network.trunk = t;
      c.network.subtasks = s;
      if (t == TrunkType::kLstm)
        c.network.context_frames = 1;
      else if (base.network.trunk != TrunkType::kDnn)
        c.network.context_frames = MtlNetworkConfig::Defaults(TrunkType::kDnn).context_frames;
      c.name = ConfigName(t, s);
      out.push_back(c);
    }
  }
  return out;
}

std::vector<int> GridBaselines() { return {-1, -1, 0, 1, 0, 1, 0, 1}; }

FoldPlan PlanFolds(Protocol protocol, const std::vector<CorpusManifest> &manifests,
                   uint64_t seed, GroupKey key) {
  switch (protocol) {
    case Protocol::kWithin: return MakeFolds(manifests, FoldMode::kLoso, seed, key);
    case Protocol::kCross: return MakeFolds(manifests, FoldMode::kLoco, seed, key);
    case Protocol::kAggregated: return StratifiedSplit(manifests, {0.8, 0.1, 0.1}, seed);
  }
  Fail(ErrorCode::kInvalidArgument, "unknown protocol");
}

ExperimentReport RunExperiment(Protocol protocol, const FeatureStore &store,
                               const FoldPlan &plan, const PipelineConfig &config,
                               uint64_t seed, int jobs, std::vector<FoldArtifacts> *artifacts) {
  config.network.Validate();
  config.train.Validate();
  config.elm.Validate();
  ExperimentReport rep;
  rep.name = config.name.empty() ? ConfigName(config.network.trunk, config.network.subtasks)
                                 : config.name;
  rep.protocol = protocol;
  rep.seed = seed;
  const int n = static_cast<int>(plan.folds.size());
  rep.folds.resize(n);
  if (artifacts) {
    artifacts->clear();
    artifacts->resize(n);
  }
  ParallelFor(n, jobs, [&](int f) {
    FoldResult &res = rep.folds[f];
    try {
      RunFold(f, plan.folds[f], protocol, store, config, seed, &res,
              artifacts ? &(*artifacts)[f] : nullptr);
    } catch (const std::exception &e) {
      res.complete = false;
      res.diagnostic = e.what();
    }
  });
  std::vector<double> uas;
  for (const auto &f : rep.folds)
    if (f.complete) uas.push_back(f.ua);
  rep.complete_folds = static_cast<int>(uas.size());
  rep.mean_ua = MeanOf(uas);
  return rep;
}

Comparison CompareReports(const ExperimentReport &baseline, const ExperimentReport &candidate,
                          double alpha) {
  Comparison c;
  c.baseline = baseline.name;
  c.candidate = candidate.name;
  std::map<std::string, double> base;
  for (const auto &f : baseline.folds)
    if (f.complete) base[f.test_group] = f.ua;
  std::vector<double> diffs;
  for (const auto &f : candidate.folds) {
    auto it = base.find(f.test_group);
    if (f.complete && it != base.end()) diffs.push_back(f.ua - it->second);
  }
  c.pairs = static_cast<int>(diffs.size());
  c.mean_gain = MeanOf(diffs);
  if (diffs.empty()) {
    c.note = "no paired folds";
    return c;
  }
  try {
    c.wilcoxon = WilcoxonSignedRank(diffs, alpha);
    c.tested = true;
  } catch (const Error &e) {
    // Identical per-fold scores: nothing to test, so not significant.
    c.note = e.what();
    c.wilcoxon = WilcoxonResult{};
    c.wilcoxon.n = 0;
    c.wilcoxon.p_value = 1.0;
    c.wilcoxon.significant = false;
  }
  return c;
}

ResultTable BuildTable(const std::vector<ExperimentReport> &reports,
                       const std::vector<int> &baseline_of, double alpha) {
  if (reports.empty()) Fail(ErrorCode::kInvalidArgument, "no reports to tabulate");
  if (baseline_of.size() != reports.size())
    Fail(ErrorCode::kInvalidArgument, "one baseline entry per report is required");
  ResultTable t;
  for (const auto &r : reports) t.columns.push_back(r.name);
  // Row order follows the first report; other reports are matched by group.
  for (const auto &f : reports[0].folds) {
    TableRow row;
    row.train = JoinGroups(f.train_groups);
    row.test = f.test_group;
    row.kind = f.test_kind;
    for (const auto &r : reports) {
      double ua = kNaN;
      for (const auto &g : r.folds)
        if (g.test_group == f.test_group && g.complete) ua = g.ua;
      row.ua.push_back(ua);
    }
    t.rows.push_back(std::move(row));
  }
  for (size_t c = 0; c < reports.size(); ++c) {
    std::vector<double> nat, act, all;
    for (const auto &row : t.rows) {
      all.push_back(row.ua[c]);
      if (row.kind == "natural") nat.push_back(row.ua[c]);
      if (row.kind == "acted") act.push_back(row.ua[c]);
    }
    t.mean_natural.push_back(MeanOf(nat));
    t.mean_acted.push_back(MeanOf(act));
    t.mean_overall.push_back(MeanOf(all));
  }
  for (size_t c = 0; c < reports.size(); ++c) {
    int b = baseline_of[c];
    if (b < 0) continue;
    if (b >= static_cast<int>(reports.size()))
      Fail(ErrorCode::kInvalidArgument, "baseline index out of range");
    t.comparisons.push_back(CompareReports(reports[b], reports[c], alpha));
  }
  return t;
}

Json ToJson(const ExperimentReport &r) {
  Json folds = Json::array();
  for (const auto &f : r.folds) {
    Json cm = Json::array();
    for (const auto &row : f.confusion.counts) cm.push_back(row);
    Json recall = Json::array();
    for (double x : f.recall) recall.push_back(x < 0 ? Json(nullptr) : Json(x));
    folds.push_back({{"index", f.index},
                     {"test_group", f.test_group},
                     {"train_groups", f.train_groups},
                     {"test_kind", f.test_kind},
                     {"status", f.complete ? "complete" : "failed"},
                     {"diagnostic", f.diagnostic},
                     {"ua", f.complete ? Json(f.ua) : Json(nullptr)},
                     {"recall", recall},
                     {"confusion", cm},
                     {"n_train", f.n_train},
                     {"n_validation", f.n_validation},
                     {"n_test", f.n_test},
                     {"best_epoch", f.best_epoch},
                     {"epochs_run", f.epochs_run}});
  }
  return {{"name", r.name},
          {"protocol", ToString(r.protocol)},
          {"seed", r.seed},
          {"folds", folds},
          {"mean_ua", NumberOrNull(r.mean_ua)},
          {"complete_folds", r.complete_folds}};
}

ExperimentReport ReportFromJson(const Json &j) {
  try {
    ExperimentReport r;
    r.name = j.at("name").get<std::string>();
    r.protocol = ParseProtocol(j.at("protocol").get<std::string>());
    r.seed = j.at("seed").get<uint64_t>();
    for (const auto &fj : j.at("folds")) {
      FoldResult f;
      f.index = fj.at("index").get<int>();
      f.test_group = fj.at("test_group").get<std::string>();
      f.train_groups = fj.at("train_groups").get<std::vector<std::string>>();
      f.test_kind = fj.at("test_kind").get<std::string>();
      f.complete = fj.at("status").get<std::string>() == "complete";
      f.diagnostic = fj.at("diagnostic").get<std::string>();
      f.ua = f.complete ? fj.at("ua").get<double>() : 0.0;
      for (int k = 0; k < kNumEmotions; ++k) {
        const Json &v = fj.at("recall").at(k);
        f.recall[k] = v.is_null() ? -1.0 : v.get<double>();
      }
      for (int a = 0; a < kNumEmotions; ++a)
        for (int b = 0; b < kNumEmotions; ++b)
          f.confusion.counts[a][b] = fj.at("confusion").at(a).at(b).get<int64_t>();
      f.n_train = fj.at("n_train").get<int>();
      f.n_validation = fj.at("n_validation").get<int>();
      f.n_test = fj.at("n_test").get<int>();
      f.best_epoch = fj.at("best_epoch").get<int>();
      f.epochs_run = fj.at("epochs_run").get<int>();
      r.folds.push_back(std::move(f));
    }
    r.mean_ua = NumberFrom(j.at("mean_ua"));
    r.complete_folds = j.at("complete_folds").get<int>();
    return r;
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorCode::kParse, std::string("malformed report: ") + e.what());
  }
}

Json ToJson(const ResultTable &t) {
  Json rows = Json::array();
  for (const auto &r : t.rows) {
    Json ua = Json::array();
    for (double x : r.ua) ua.push_back(NumberOrNull(x));
    rows.push_back({{"train", r.train}, {"test", r.test}, {"kind", r.kind}, {"ua", ua}});
  }
  auto vec = [](const std::vector<double> &v) {
    Json a = Json::array();
    for (double x : v) a.push_back(NumberOrNull(x));
    return a;
  };
  Json comps = Json::array();
  for (const auto &c : t.comparisons)
    comps.push_back({{"baseline", c.baseline},
                     {"candidate", c.candidate},
                     {"pairs", c.pairs},
                     {"mean_gain", NumberOrNull(c.mean_gain)},
                     {"tested", c.tested},
                     {"note", c.note},
                     {"w_plus", c.wilcoxon.w_plus},
                     {"w_minus", c.wilcoxon.w_minus},
                     {"n", c.wilcoxon.n},
                     {"p_value", c.wilcoxon.p_value},
                     {"exact", c.wilcoxon.exact},
                     {"significant", c.wilcoxon.significant}});
  return {{"columns", t.columns},
          {"rows", rows},
          {"mean_natural", vec(t.mean_natural)},
          {"mean_acted", vec(t.mean_acted)},
          {"mean_overall", vec(t.mean_overall)},
          {"comparisons", comps}};
}

namespace {

std::ofstream OpenOut(const std::filesystem::path &p) {
  std::ofstream os(p);
  if (!os) Fail(ErrorCode::kIo, "cannot write " + p.string());
  os.precision(10);
  return os;
}

void PutNumber(std::ostream &os, double x) {
  if (!std::isnan(x)) os << x;
}

}  // namespace

void WriteReportFiles(const ExperimentReport &r, const std::filesystem::path &dir,
                      const Json &config) {
  std::filesystem::create_directories(dir);
  Json j = ToJson(r);
  j["config"] = config;
  WriteJsonFile((dir / "report.json").string(), j);

  auto csv = OpenOut(dir / "report.csv");
  csv << "fold,test_group,status,ua,recall_neutral,recall_happy,recall_sad,recall_angry,n_test\n";
  for (const auto &f : r.folds) {
    csv << f.index << ',' << f.test_group << ',' << (f.complete ? "complete" : "failed") << ',';
    if (f.complete) csv << f.ua;
    for (double x : f.recall) {
      csv << ',';
      if (f.complete && x >= 0) csv << x;
    }
    csv << ',' << f.n_test << '\n';
  }

  auto cm = OpenOut(dir / "confusion.csv");
  cm << "fold,test_group,true,neutral,happy,sad,angry\n";
  for (const auto &f : r.folds) {
    if (!f.complete) continue;
    for (int a = 0; a < kNumEmotions; ++a) {
      cm << f.index << ',' << f.test_group << ',' << ToString(static_cast<Emotion>(a));
      for (int b = 0; b < kNumEmotions; ++b) cm << ',' << f.confusion.counts[a][b];
      cm << '\n';
    }
  }
}

void WriteTableFiles(const ResultTable &t, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  WriteJsonFile((dir / "table.json").string(), ToJson(t));
  auto os = OpenOut(dir / "table.csv");
  os << "train,test";
  for (const auto &c : t.columns) os << ',' << c;
  os << '\n';
  for (const auto &r : t.rows) {
    os << '"' << r.train << "\"," << r.test;
    for (double x : r.ua) {
      os << ',';
      PutNumber(os, x);
    }
    os << '\n';
  }
  auto summary = [&](const char *label, const std::vector<double> &v) {
    os << label << ',';
    for (double x : v) {
      os << ',';
      PutNumber(os, x);
    }
    os << '\n';
  };
  summary("mean_natural", t.mean_natural);
  summary("mean_acted", t.mean_acted);
  summary("mean_overall", t.mean_overall);

  auto cs = OpenOut(dir / "comparisons.csv");
  cs << "baseline,candidate,pairs,mean_gain,w_plus,w_minus,n,p_value,exact,significant,note\n";
  for (const auto &c : t.comparisons) {
    cs << c.baseline << ',' << c.candidate << ',' << c.pairs << ',';
    PutNumber(cs, c.mean_gain);
    cs << ',' << c.wilcoxon.w_plus << ',' << c.wilcoxon.w_minus << ',' << c.wilcoxon.n << ','
       << c.wilcoxon.p_value << ',' << (c.wilcoxon.exact ? 1 : 0) << ','
       << (c.wilcoxon.significant ? 1 : 0) << ",\"" << c.note << "\"\n";
  }
}

}  // namespace pmtl
