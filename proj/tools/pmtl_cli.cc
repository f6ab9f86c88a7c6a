// tools/pmtl_cli.cc

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

// tools/pmtl_cli.cc

// Command-line front end. Everything below goes through the C interface; the
// only other dependencies are the header-only argument and JSON parsers.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "pmtl/pmtl.h"

using Json = nlohmann::json;

namespace {

// Stage failure carrying the library's message.
struct StageError {
  std::string message;
};

void Check(pmtl_status s) {
  if (s != PMTL_OK) throw StageError{std::string(pmtl_status_string(s)) + ": " + pmtl_last_error()};
}

Json LoadConfigFile(const std::string &path) {
  if (path.empty()) return Json::object();
  std::ifstream is(path);
  if (!is) throw StageError{"cannot read config " + path};
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    Json j = Json::parse(ss.str());
    if (!j.is_object()) throw StageError{path + ": config must be a JSON object"};
    return j;
  } catch (const nlohmann::json::exception &e) {
    throw StageError{path + ": " + e.what()};
  }
}

std::string TakeString(char *s) {
  std::string out = s ? s : "";
  pmtl_string_free(s);
  return out;
}

// Flags shared by the stages that read manifests and train models. Only
// flags the user actually passed override the config file.
struct RunFlags {
  std::string config;
  std::vector<std::string> manifests;
  std::string corpus;
  std::string protocol, subtasks, trunk, group_key;
  std::vector<int> layers;
  int epochs = 0, patience = 0, batch = 0, jobs = 0, hidden = 0;
  double lr = 0, theta = 0, lambda = -1;
  uint64_t seed = 0;
  bool grid = false;

  CLI::Option *seed_opt = nullptr;

  void AddData(CLI::App *app) {
    app->add_option("--config", config, "JSON run config (e.g. a previous config.json)");
    app->add_option("--manifest", manifests, "manifest CSV (repeatable)");
    app->add_option("--corpus", corpus, "keep only this corpus_id");
    app->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    seed_opt = app->add_option("--seed", seed, "run seed");
  }

  void AddModel(CLI::App *app) {
    app->add_option("--trunk", trunk, "dnn|lstm")->check(CLI::IsMember({"dnn", "lstm"}));
    app->add_option("--subtasks", subtasks, "all|gender|naturalness|none")
        ->check(CLI::IsMember({"all", "gender", "naturalness", "none"}));
    app->add_option("--layers", layers, "trunk layer sizes, e.g. --layers 32 32");
    app->add_option("--lambda", lambda, "weight of each subtask loss");
    app->add_option("--epochs", epochs, "maximum epochs")->check(CLI::PositiveNumber);
    app->add_option("--patience", patience, "early-stopping patience")->check(CLI::PositiveNumber);
    app->add_option("--batch", batch, "mini-batch size")->check(CLI::PositiveNumber);
    app->add_option("--lr", lr, "Adam learning rate")->check(CLI::PositiveNumber);
    app->add_option("--hidden", hidden, "ELM hidden units")->check(CLI::PositiveNumber);
    app->add_option("--theta", theta, "HLF threshold")->check(CLI::Range(0.0, 1.0));
  }

  Json Build(CLI::App *app) const {
    Json j = LoadConfigFile(config);
    auto given = [&](const char *name) { return app->get_option_no_throw(name) &&
                                                app->count(name) > 0; };
    if (given("--manifest")) j["manifests"] = manifests;
    if (given("--corpus")) j["corpus"] = corpus;
    if (given("--jobs")) j["jobs"] = jobs;
    if (given("--seed")) j["seed"] = seed;
    if (given("--protocol")) j["protocol"] = protocol;
    if (given("--group-key")) j["group_key"] = group_key;
    if (given("--grid")) j["grid"] = grid;
    if (given("--trunk")) {
      // A new trunk brings its own default topology unless --layers is given.
      Json &net = j["network"];
      net["trunk"] = trunk;
      if (!given("--layers")) {
        net.erase("layer_sizes");
        net.erase("context_frames");
      }
    }
    if (given("--subtasks")) j["network"]["subtasks"] = subtasks;
    if (given("--layers")) j["network"]["layer_sizes"] = layers;
    if (given("--lambda")) {
      j["network"]["lambda_gender"] = lambda;
      j["network"]["lambda_naturalness"] = lambda;
    }
    if (given("--epochs")) {
      j["train"]["max_epochs"] = epochs;
      if (!given("--patience") && !j["train"].contains("patience"))
        j["train"]["patience"] = std::min(5, std::max(1, epochs - 1));
    }
    if (given("--patience")) j["train"]["patience"] = patience;
    if (given("--batch")) j["train"]["batch_size"] = batch;
    if (given("--lr")) j["train"]["lr"] = lr;
    if (given("--hidden")) j["elm"]["n_hidden"] = hidden;
    if (given("--theta")) j["hlf_theta"] = theta;
    return j;
  }
};

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Multi-task speech emotion recognition toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pmtl_version()));

  // ---- synth
  auto *synth = app.add_subcommand("synth", "generate a synthetic labelled corpus");
  std::string synth_out, synth_config;
  int corpora = 0, speakers = 0, utts = 0;
  double duration = 0;
  uint64_t synth_seed = 0;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--config", synth_config, "config.json of an earlier synth run");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--corpora", corpora, "number of corpora")->check(CLI::PositiveNumber);
  synth->add_option("--speakers", speakers, "speakers per corpus")->check(CLI::PositiveNumber);
  synth->add_option("--utts", utts, "utterances per speaker")->check(CLI::PositiveNumber);
  synth->add_option("--duration", duration, "seconds per utterance")->check(CLI::PositiveNumber);

  // ---- features
  auto *features = app.add_subcommand("features", "extract frame features for a manifest");
  RunFlags feat_flags;
  std::string feat_out;
  bool feat_csv = false;
  feat_flags.AddData(features);
  features->add_option("--out", feat_out, "output directory")->required();
  features->add_flag("--csv", feat_csv, "also write CSV copies");

  // ---- train
  auto *train = app.add_subcommand("train", "train one multi-task model on all utterances");
  RunFlags train_flags;
  std::string train_out;
  train_flags.AddData(train);
  train_flags.AddModel(train);
  train->add_option("--out", train_out, "run directory")->required();

  // ---- hlf
  auto *hlf = app.add_subcommand("hlf", "utterance-level features from a trained model");
  RunFlags hlf_flags;
  std::string hlf_model, hlf_out;
  hlf_flags.AddData(hlf);
  hlf->add_option("--model", hlf_model, "model.ckpt")->required();
  hlf->add_option("--theta", hlf_flags.theta, "threshold of the fraction functional")
      ->check(CLI::Range(0.0, 1.0));
  hlf->add_option("--out", hlf_out, "output CSV")->required();

  // ---- elm
  auto *elm = app.add_subcommand("elm", "fit and score the ELM back-end on HLF tables");
  std::string elm_train, elm_test, elm_out;
  int elm_hidden = 0;
  double elm_ridge = -1;
  uint64_t elm_seed = 0;
  elm->add_option("--train", elm_train, "HLF CSV to fit on")->required();
  elm->add_option("--test", elm_test, "HLF CSV to score (default: rows marked test)");
  elm->add_option("--hidden", elm_hidden, "hidden units")->check(CLI::PositiveNumber);
  elm->add_option("--ridge", elm_ridge, "ridge penalty")->check(CLI::NonNegativeNumber);
  elm->add_option("--seed", elm_seed, "seed");
  elm->add_option("--out", elm_out, "output directory")->required();

  // ---- xval
  auto *xval = app.add_subcommand("xval", "cross-validated experiment");
  RunFlags x_flags;
  std::string x_out;
  x_flags.AddData(xval);
  x_flags.AddModel(xval);
  xval->add_option("--protocol", x_flags.protocol, "within|cross|aggregated")
      ->check(CLI::IsMember({"within", "cross", "aggregated"}));
  xval->add_option("--group-key", x_flags.group_key, "corpus|corpus_naturalness")
      ->check(CLI::IsMember({"corpus", "corpus_naturalness"}));
  xval->add_flag("--grid", x_flags.grid, "run all eight trunk x subtask configurations");
  xval->add_option("--out", x_out, "run directory")->required();

  // ---- embed
  auto *embed = app.add_subcommand("embed", "t-SNE embedding of an HLF table");
  std::string emb_in, emb_out, emb_config;
  uint64_t emb_seed = 0;
  double perplexity = 0;
  int iters = 0, dims = 0;
  embed->add_option("--input", emb_in, "HLF CSV");
  embed->add_option("--config", emb_config, "config.json of an earlier embed run");
  embed->add_option("--seed", emb_seed, "seed");
  embed->add_option("--perplexity", perplexity, "perplexity")->check(CLI::PositiveNumber);
  embed->add_option("--iters", iters, "iterations")->check(CLI::PositiveNumber);
  embed->add_option("--dims", dims, "2 or 3")->check(CLI::IsMember({2, 3}));
  embed->add_option("--out", emb_out, "output directory")->required();

  // ---- report
  auto *report = app.add_subcommand("report", "tabulate and compare finished runs");
  std::vector<std::string> runs;
  std::string rep_out;
  report->add_option("--runs", runs, "run directories; the first is the baseline")->required();
  report->add_option("--out", rep_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      Json j = LoadConfigFile(synth_config);
      Json cfg = j.contains("synth") ? j["synth"] : Json::object();
      if (synth->count("--seed")) cfg["seed"] = synth_seed;
      if (synth->count("--corpora")) cfg["n_corpora"] = corpora;
      if (synth->count("--speakers")) cfg["speakers_per_corpus"] = speakers;
      if (synth->count("--utts")) cfg["utterances_per_speaker"] = utts;
      if (synth->count("--duration")) cfg["duration_s"] = duration;
      pmtl_manifest *m = nullptr;
      Check(pmtl_synth_generate(cfg.dump().c_str(), synth_out.c_str(), &m));
      std::printf("wrote %zu utterances to %s\n", pmtl_manifest_size(m), synth_out.c_str());
      pmtl_manifest_free(m);
    } else if (*features) {
      int n = 0;
      Check(pmtl_features_stage(feat_flags.Build(features).dump().c_str(), feat_out.c_str(),
                                feat_csv ? 1 : 0, &n));
      std::printf("wrote features of %d utterances to %s\n", n, feat_out.c_str());
    } else if (*train) {
      pmtl_model *m = nullptr;
      Check(pmtl_train_stage(train_flags.Build(train).dump().c_str(), train_out.c_str(), &m));
      char *info = nullptr;
      Check(pmtl_model_info_json(m, &info));
      Json j = Json::parse(TakeString(info));
      std::printf("best epoch %d; model written to %s\n", j["best_epoch"].get<int>(),
                  train_out.c_str());
      pmtl_model_free(m);
    } else if (*hlf) {
      Json j = hlf_flags.Build(hlf);
      if (hlf->count("--theta")) j["hlf_theta"] = hlf_flags.theta;
      Check(pmtl_hlf_stage(j.dump().c_str(), hlf_model.c_str(), hlf_out.c_str()));
      std::printf("wrote %s\n", hlf_out.c_str());
    } else if (*elm) {
      Json cfg = Json::object();
      if (elm->count("--hidden")) cfg["n_hidden"] = elm_hidden;
      if (elm->count("--ridge")) cfg["ridge"] = elm_ridge;
      double ua = 0;
      Check(pmtl_elm_stage(elm_train.c_str(), elm_test.c_str(), cfg.dump().c_str(), elm_seed,
                           elm_out.c_str(), &ua));
      std::printf("UA %.4f\n", ua);
    } else if (*xval) {
      pmtl_report *r = nullptr;
      Check(pmtl_xval_stage(x_flags.Build(xval).dump().c_str(), x_out.c_str(), &r));
      char *js = nullptr;
      Check(pmtl_report_json(r, &js));
      Json j = Json::parse(TakeString(js));
      for (const auto &rep : j["reports"]) {
        int failed = 0;
        for (const auto &f : rep["folds"]) failed += f["status"] == "complete" ? 0 : 1;
        std::string mean = rep["mean_ua"].is_null() ? "n/a" : std::to_string(rep["mean_ua"].get<double>());
        std::printf("%-18s folds %zu  failed %d  mean UA %s\n", rep["name"].get<std::string>().c_str(),
                    rep["folds"].size(), failed, mean.c_str());
      }
      pmtl_report_free(r);
    } else if (*embed) {
      Json j = LoadConfigFile(emb_config);
      Json cfg = j.contains("tsne") ? j["tsne"] : Json::object();
      std::string input = emb_in;
      if (input.empty() && j.contains("input")) input = j["input"].get<std::string>();
      if (input.empty()) throw StageError{"embed needs --input"};
      if (embed->count("--seed")) cfg["seed"] = emb_seed;
      if (embed->count("--perplexity")) cfg["perplexity"] = perplexity;
      if (embed->count("--iters")) cfg["n_iter"] = iters;
      if (embed->count("--dims")) cfg["out_dims"] = dims;
      pmtl_matrix *e = nullptr;
      Check(pmtl_embed_stage(input.c_str(), cfg.dump().c_str(), emb_out.c_str(), &e));
      std::printf("embedded %zu points into %s\n", pmtl_matrix_rows(e), emb_out.c_str());
      pmtl_matrix_free(e);
    } else if (*report) {
      std::vector<const char *> dirs;
      for (const auto &r : runs) dirs.push_back(r.c_str());
      char *table = nullptr;
      Check(pmtl_report_stage(dirs.data(), dirs.size(), rep_out.c_str(), &table));
      Json t = Json::parse(TakeString(table));
      std::printf("tabulated %zu runs into %s\n", t["columns"].size(), rep_out.c_str());
    }
  } catch (const StageError &e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return 1;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
