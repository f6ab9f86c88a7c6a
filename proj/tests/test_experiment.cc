// tests/test_experiment.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "experiment.h"
#include "pipeline.h"
#include "test_util.h"

using namespace pmtl;
using pmtl::testing::ReadBytes;
using pmtl::testing::TempDir;

namespace {

SynthConfig TinySynth() {
  SynthConfig s;
  s.n_corpora = 3;
  s.speakers_per_corpus = 2;
  s.utterances_per_speaker = 8;
  s.duration_s = 0.5;
  s.seed = 3;
  return s;
}

PipelineConfig TinyPipeline(TrunkType trunk) {
  PipelineConfig p;
  p.network = MtlNetworkConfig::Defaults(trunk);
  p.network.layer_sizes = {8};
  p.train.max_epochs = 3;
  p.train.patience = 2;
  p.train.batch_size = 64;
  p.elm.n_hidden = 20;
  return p;
}

// Shared corpus so the expensive parts run once.
struct Fixture {
  TempDir dir;
  std::vector<CorpusManifest> manifests;
  FeatureStore store;
  Fixture() {
    manifests.push_back(GenerateSynthetic(TinySynth(), dir.path()));
    store = FeatureStore::Extract(manifests, FeatureConfig{}, 2);
  }
};

Fixture &Shared() {
  static Fixture f;
  return f;
}

FoldResult Fake(const std::string &group, double ua, const std::string &kind) {
  FoldResult f;
  f.test_group = group;
  f.ua = ua;
  f.complete = true;
  f.test_kind = kind;
  return f;
}

}  // namespace

TEST_CASE("grid columns and baselines") {
  auto grid = GridConfigs(TinyPipeline(TrunkType::kLstm));
  std::vector<std::string> names;
  for (const auto &c : grid) names.push_back(c.name);
  CHECK(names == std::vector<std::string>{"DNN-STL", "LSTM-STL", "DNN-ALL", "LSTM-ALL",
                                          "DNN-GENDER", "LSTM-GENDER", "DNN-NATURALNESS",
                                          "LSTM-NATURALNESS"});
  CHECK(grid[0].network.context_frames == 25);
  CHECK(grid[0].network.InputWidth() == 800);
  CHECK(grid[1].network.context_frames == 1);
  CHECK(grid[2].network.Heads().size() == 3);
  CHECK(grid[4].network.Heads().size() == 2);
  for (const auto &c : grid) CHECK(c.network.layer_sizes == std::vector<int>{8});
  auto b = GridBaselines();
  for (size_t i = 0; i < grid.size(); ++i)
    if (b[i] >= 0) CHECK(grid[b[i]].network.trunk == grid[i].network.trunk);
}

TEST_CASE("feature store is independent of the thread count") {
  auto &fx = Shared();
  auto one = FeatureStore::Extract(fx.manifests, FeatureConfig{}, 1);
  CHECK(one.size() == 48);
  for (const auto &r : fx.manifests[0].records)
    CHECK(one.features(r.utterance_id) == fx.store.features(r.utterance_id));
  CHECK_THROWS_AS(one.features("nope"), Error);
  CHECK_THROWS_AS(FeatureStore::Extract({fx.manifests[0], fx.manifests[0]}, FeatureConfig{}),
                  Error);
}

TEST_CASE("cross-corpus run completes and is reproducible across job counts") {
  auto &fx = Shared();
  auto plan = PlanFolds(Protocol::kCross, fx.manifests, 5, GroupKey::kCorpus);
  REQUIRE(plan.folds.size() == 3);
  for (TrunkType t : {TrunkType::kLstm, TrunkType::kDnn}) {
    std::vector<FoldArtifacts> art;
    auto a = RunExperiment(Protocol::kCross, fx.store, plan, TinyPipeline(t), 5, 1, &art);
    auto b = RunExperiment(Protocol::kCross, fx.store, plan, TinyPipeline(t), 5, 3);
    CHECK(a.complete_folds == 3);
    CHECK(ToJson(a) == ToJson(b));
    CHECK(a.folds[0].test_kind == "natural");
    CHECK(a.folds[1].test_kind == "acted");
    CHECK(a.folds[2].test_kind == "mixed");
    for (const auto &f : a.folds) {
      CHECK(f.n_test == 16);
      CHECK(f.confusion.Total() == 16);
      CHECK(f.ua >= 0.0);
      CHECK(f.ua <= 1.0);
    }
    REQUIRE(art.size() == 3);
    CHECK(art[0].hlf.size() == 16);
    CHECK(art[0].elm.output_weight.rows() == 4);
    auto c = RunExperiment(Protocol::kCross, fx.store, plan, TinyPipeline(t), 6);
    CHECK(ToJson(c) != ToJson(a));
  }
}

TEST_CASE("aggregated and within protocols") {
  auto &fx = Shared();
  auto agg = PlanFolds(Protocol::kAggregated, fx.manifests, 1, GroupKey::kCorpus);
  REQUIRE(agg.folds.size() == 1);
  std::vector<FoldArtifacts> art;
  auto r = RunExperiment(Protocol::kAggregated, fx.store, agg, TinyPipeline(TrunkType::kLstm), 1,
                         1, &art);
  CHECK(r.complete_folds == 1);
  CHECK(art[0].hlf.size() == 48);
  CHECK(std::is_sorted(art[0].hlf.begin(), art[0].hlf.end(),
                       [](const HlfRow &a, const HlfRow &b) { return a.utterance_id < b.utterance_id; }));

  auto within = PlanFolds(Protocol::kWithin, fx.manifests, 1, GroupKey::kCorpus);
  CHECK(within.folds.size() == 6);
}

TEST_CASE("a broken fold is recorded, not fatal") {
  auto &fx = Shared();
  auto plan = PlanFolds(Protocol::kCross, fx.manifests, 5, GroupKey::kCorpus);
  plan.folds[1].test_ids.push_back("missing-utterance");
  auto r = RunExperiment(Protocol::kCross, fx.store, plan, TinyPipeline(TrunkType::kLstm), 5);
  CHECK(r.complete_folds == 2);
  CHECK_FALSE(r.folds[1].complete);
  CHECK(r.folds[1].diagnostic.find("missing-utterance") != std::string::npos);
  CHECK(std::isfinite(r.mean_ua));
  auto j = ToJson(r);
  CHECK(j["folds"][1]["ua"].is_null());
  auto back = ReportFromJson(j);
  CHECK(ToJson(back) == j);
}

TEST_CASE("comparisons pair folds by test group") {
  ExperimentReport base, cand, same;
  base.name = "B";
  cand.name = "C";
  same.name = "S";
  const char *groups[6] = {"g1", "g2", "g3", "g4", "g5", "g6"};
  for (int i = 0; i < 6; ++i) {
    base.folds.push_back(Fake(groups[i], 0.5, i % 2 ? "acted" : "natural"));
    cand.folds.push_back(Fake(groups[5 - i], 0.6 + 0.01 * (5 - i), "x"));
    same.folds.push_back(Fake(groups[i], 0.5, "x"));
  }
  auto c = CompareReports(base, cand);
  CHECK(c.pairs == 6);
  CHECK(c.tested);
  CHECK(c.mean_gain == doctest::Approx(0.125));
  CHECK(c.wilcoxon.p_value == 0.03125);
  CHECK(c.wilcoxon.significant);
  auto s = CompareReports(base, same);
  CHECK_FALSE(s.tested);
  CHECK(s.wilcoxon.p_value == 1.0);
  CHECK_FALSE(s.note.empty());

  auto t = BuildTable({base, cand, same}, {-1, 0, 0});
  CHECK(t.columns == std::vector<std::string>{"B", "C", "S"});
  CHECK(t.rows.size() == 6);
  CHECK(t.rows[0].ua[1] == doctest::Approx(0.6));
  CHECK(t.mean_natural[0] == 0.5);
  CHECK(t.mean_overall[1] == doctest::Approx(0.625));
  CHECK(t.comparisons.size() == 2);
  CHECK_THROWS_AS(BuildTable({base}, {-1, 0}), Error);
}

TEST_CASE("xval stage writes reproducible artifacts") {
  auto &fx = Shared();
  TempDir out1, out2;
  RunConfig cfg;
  cfg.seed = 2;
  cfg.manifests = {(fx.dir / "manifest.csv").string()};
  cfg.network.layer_sizes = {8};
  cfg.train.max_epochs = 2;
  cfg.train.patience = 1;
  cfg.elm.n_hidden = 20;
  auto r1 = XvalStage(cfg, out1.path());
  auto r2 = XvalStage(cfg, out2.path());
  REQUIRE(r1.reports.size() == 1);
  for (const char *f : {"report.json", "report.csv", "confusion.csv", "hlf.csv",
                        "fold_00/model.ckpt", "fold_00/elm.ckpt", "fold_02/history.csv"}) {
    CAPTURE(f);
    REQUIRE(std::filesystem::exists(out1 / f));
    CHECK(ReadBytes(out1 / f) == ReadBytes(out2 / f));
  }
  auto hlf = ReadHlfCsv(out1 / "hlf.csv");
  CHECK(hlf.size() == 48);

  TempDir emb;
  TsneConfig tc;
  tc.perplexity = 5;
  tc.n_iter = 200;
  auto e = EmbedStage(out1 / "hlf.csv", tc, emb.path());
  CHECK(e.embedding.rows() == 48);
  CHECK(std::filesystem::exists(emb / "embedding.svg"));
  CHECK(std::filesystem::exists(emb / "kl_trace.csv"));

  TempDir rep;
  auto table = ReportStage({out1.path(), out2.path()}, rep.path());
  CHECK(table.columns.size() == 2);
  CHECK(table.columns[1] != table.columns[0]);
  CHECK(std::filesystem::exists(rep / "table.csv"));
}
