// src/capi.cc

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

#include "pmtl/pmtl.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "common.h"
#include "config.h"
#include "elm.h"
#include "embed.h"
#include "experiment.h"
#include "frame_features.h"
#include "hlf.h"
#include "metrics.h"
#include "mtl.h"
#include "pipeline.h"
#include "wav.h"

struct pmtl_manifest {
  pmtl::CorpusManifest value;
};
struct pmtl_matrix {
  pmtl::nn::Matrix value;
};
struct pmtl_model {
  pmtl::TrainedModel value;
};
struct pmtl_elm {
  pmtl::ElmModel value;
};
struct pmtl_report {
  pmtl::XvalResult value;
  bool grid = false;
};

namespace {

thread_local std::string g_last_error;

pmtl_status SetError(pmtl_status s, const std::string &msg) {
  g_last_error = msg;
  return s;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
pmtl_status Guard(F &&body) {
  g_last_error.clear();
  try {
    body();
    return PMTL_OK;
  } catch (const pmtl::Error &e) {
    return SetError(static_cast<pmtl_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc &) {
    return SetError(PMTL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return SetError(PMTL_ERR_INTERNAL, e.what());
  }
}

void Need(const void *p, const char *what) {
  if (!p) pmtl::Fail(pmtl::ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

bool Blank(const char *s) { return !s || !*s; }

template <typename T>
T ParseConfig(const char *json, const char *what) {
  T c{};
  if (!Blank(json)) pmtl::FromJson(pmtl::ParseJson(json, what), &c);
  return c;
}

pmtl::RunConfig ParseRun(const char *json) {
  pmtl::RunConfig c;
  if (!Blank(json)) pmtl::FromJson(pmtl::ParseJson(json, "run config"), &c);
  return c;
}

char *CopyString(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

pmtl_matrix *NewMatrix(pmtl::nn::Matrix m) { return new pmtl_matrix{std::move(m)}; }

}  // namespace

extern "C" {

const char *pmtl_version(void) { return "1.0.0"; }

const char *pmtl_last_error(void) { return g_last_error.c_str(); }

const char *pmtl_status_string(pmtl_status s) {
  switch (s) {
    case PMTL_OK: return "ok";
    case PMTL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PMTL_ERR_IO: return "i/o error";
    case PMTL_ERR_PARSE: return "parse error";
    case PMTL_ERR_NUMERIC: return "numeric error";
    case PMTL_ERR_STATE: return "invalid state";
    case PMTL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void pmtl_string_free(char *s) { std::free(s); }

// ------------------------------------------------------------------ matrices

pmtl_status pmtl_matrix_create(size_t rows, size_t cols, const double *data, pmtl_matrix **out) {
  return Guard([&] {
    Need(out, "out");
    if (rows * cols > 0) Need(data, "data");
    pmtl::nn::Matrix m(static_cast<int64_t>(rows), static_cast<int64_t>(cols));
    if (rows * cols > 0) std::memcpy(m.data(), data, rows * cols * sizeof(double));
    *out = NewMatrix(std::move(m));
  });
}

void pmtl_matrix_free(pmtl_matrix *m) { delete m; }
size_t pmtl_matrix_rows(const pmtl_matrix *m) { return m ? m->value.rows() : 0; }
size_t pmtl_matrix_cols(const pmtl_matrix *m) { return m ? m->value.cols() : 0; }
const double *pmtl_matrix_data(const pmtl_matrix *m) { return m ? m->value.data() : nullptr; }

// ------------------------------------------------------------------ corpora

pmtl_status pmtl_manifest_load(const char *path, pmtl_manifest **out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    *out = new pmtl_manifest{pmtl::LoadManifest(path)};
  });
}

pmtl_status pmtl_manifest_write(const pmtl_manifest *m, const char *path) {
  return Guard([&] {
    Need(m, "manifest");
    Need(path, "path");
    pmtl::WriteManifest(m->value, path);
  });
}

void pmtl_manifest_free(pmtl_manifest *m) { delete m; }
size_t pmtl_manifest_size(const pmtl_manifest *m) { return m ? m->value.records.size() : 0; }

pmtl_status pmtl_manifest_summary_json(const pmtl_manifest *m, char **out_json) {
  return Guard([&] {
    Need(m, "manifest");
    Need(out_json, "out_json");
    pmtl::Json arr = pmtl::Json::array();
    for (const auto &s : m->value.Summaries()) {
      pmtl::Json emo;
      for (int k = 0; k < pmtl::kNumEmotions; ++k)
        emo[pmtl::ToString(static_cast<pmtl::Emotion>(k))] = s.emotion[k];
      arr.push_back({{"corpus_id", s.corpus_id}, {"speakers", s.speakers}, {"emotion", emo},
                     {"female", s.female}, {"male", s.male}, {"natural", s.natural},
                     {"acted", s.acted}, {"total", s.total}});
    }
    *out_json = CopyString(arr.dump());
  });
}

pmtl_status pmtl_synth_generate(const char *synth_json, const char *out_dir, pmtl_manifest **out) {
  return Guard([&] {
    Need(out_dir, "out_dir");
    auto cfg = ParseConfig<pmtl::SynthConfig>(synth_json, "synth config");
    auto m = pmtl::SynthStage(cfg, out_dir);
    if (out) *out = new pmtl_manifest{std::move(m)};
  });
}

// ------------------------------------------------------------------ features

pmtl_status pmtl_features_from_samples(const double *samples, size_t n, int sample_rate,
                                       const char *features_json, pmtl_matrix **out) {
  return Guard([&] {
    Need(samples, "samples");
    Need(out, "out");
    auto cfg = ParseConfig<pmtl::FeatureConfig>(features_json, "feature config");
    auto f = pmtl::ExtractFeatures(std::span<const double>(samples, n), sample_rate, cfg);
    *out = NewMatrix(f.data);
  });
}

pmtl_status pmtl_features_from_wav(const char *wav_path, const char *features_json,
                                   pmtl_matrix **out) {
  return Guard([&] {
    Need(wav_path, "wav_path");
    Need(out, "out");
    auto cfg = ParseConfig<pmtl::FeatureConfig>(features_json, "feature config");
    auto w = pmtl::ReadWav(wav_path);
    *out = NewMatrix(pmtl::ExtractFeatures(w.samples, w.sample_rate, cfg).data);
  });
}

pmtl_status pmtl_features_read(const char *path, pmtl_matrix **out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    *out = NewMatrix(pmtl::ReadFeatureFile(path).data);
  });
}

pmtl_status pmtl_features_write(const pmtl_matrix *m, const char *path) {
  return Guard([&] {
    Need(m, "matrix");
    Need(path, "path");
    pmtl::WriteFeatureFile(path, pmtl::FrameFeatureMatrix{m->value});
  });
}

pmtl_status pmtl_features_write_csv(const pmtl_matrix *m, const char *path) {
  return Guard([&] {
    Need(m, "matrix");
    Need(path, "path");
    pmtl::WriteFeatureCsv(path, pmtl::FrameFeatureMatrix{m->value});
  });
}

// ------------------------------------------------------------------ stages

pmtl_status pmtl_features_stage(const char *run_json, const char *out_dir, int csv,
                                int *n_written) {
  return Guard([&] {
    Need(out_dir, "out_dir");
    int n = pmtl::FeaturesStage(ParseRun(run_json), out_dir, csv != 0);
    if (n_written) *n_written = n;
  });
}

pmtl_status pmtl_train_stage(const char *run_json, const char *out_dir, pmtl_model **out) {
  return Guard([&] {
    Need(out_dir, "out_dir");
    auto m = pmtl::TrainStage(ParseRun(run_json), out_dir);
    if (out) *out = new pmtl_model{std::move(m)};
  });
}

pmtl_status pmtl_hlf_stage(const char *run_json, const char *model_path, const char *out_csv) {
  return Guard([&] {
    Need(model_path, "model_path");
    Need(out_csv, "out_csv");
    pmtl::HlfStage(ParseRun(run_json), model_path, out_csv);
  });
}

pmtl_status pmtl_elm_stage(const char *train_csv, const char *test_csv, const char *elm_json,
                           uint64_t seed, const char *out_dir, double *ua) {
  return Guard([&] {
    Need(train_csv, "train_csv");
    Need(out_dir, "out_dir");
    auto cfg = ParseConfig<pmtl::ElmConfig>(elm_json, "elm config");
    auto r = pmtl::ElmStage(train_csv, Blank(test_csv) ? "" : test_csv, cfg, seed, out_dir);
    if (ua) *ua = r.ua;
  });
}

pmtl_status pmtl_xval_stage(const char *run_json, const char *out_dir, pmtl_report **out) {
  return Guard([&] {
    Need(out_dir, "out_dir");
    auto cfg = ParseRun(run_json);
    auto r = pmtl::XvalStage(cfg, out_dir);
    if (out) *out = new pmtl_report{std::move(r), cfg.grid};
  });
}

pmtl_status pmtl_embed_stage(const char *hlf_csv, const char *tsne_json, const char *out_dir,
                             pmtl_matrix **embedding) {
  return Guard([&] {
    Need(hlf_csv, "hlf_csv");
    Need(out_dir, "out_dir");
    auto cfg = ParseConfig<pmtl::TsneConfig>(tsne_json, "tsne config");
    auto r = pmtl::EmbedStage(hlf_csv, cfg, out_dir);
    if (embedding) *embedding = NewMatrix(std::move(r.embedding));
  });
}

pmtl_status pmtl_report_stage(const char *const *run_dirs, size_t n_runs, const char *out_dir,
                              char **table_json) {
  return Guard([&] {
    Need(run_dirs, "run_dirs");
    Need(out_dir, "out_dir");
    std::vector<std::filesystem::path> dirs;
    for (size_t i = 0; i < n_runs; ++i) {
      Need(run_dirs[i], "run directory");
      dirs.emplace_back(run_dirs[i]);
    }
    auto t = pmtl::ReportStage(dirs, out_dir);
    if (table_json) *table_json = CopyString(pmtl::ToJson(t).dump());
  });
}

pmtl_status pmtl_run_config_resolve(const char *run_json, char **out_json) {
  return Guard([&] {
    Need(out_json, "out_json");
    auto cfg = ParseRun(run_json);
    cfg.Validate();
    *out_json = CopyString(pmtl::ToJson(cfg).dump(2));
  });
}

// ------------------------------------------------------------------ models

pmtl_status pmtl_model_load(const char *path, pmtl_model **out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    *out = new pmtl_model{pmtl::LoadModel(path)};
  });
}

pmtl_status pmtl_model_save(const pmtl_model *m, const char *path) {
  return Guard([&] {
    Need(m, "model");
    Need(path, "path");
    pmtl::SaveModel(m->value, path);
  });
}

void pmtl_model_free(pmtl_model *m) { delete m; }

pmtl_status pmtl_model_posteriors(const pmtl_model *m, const pmtl_matrix *features,
                                  pmtl_matrix **out) {
  return Guard([&] {
    Need(m, "model");
    Need(features, "features");
    Need(out, "out");
    *out = NewMatrix(pmtl::EmotionPosteriors(m->value, pmtl::FrameFeatureMatrix{features->value}));
  });
}

pmtl_status pmtl_model_info_json(const pmtl_model *m, char **out_json) {
  return Guard([&] {
    Need(m, "model");
    Need(out_json, "out_json");
    pmtl::Json heads = pmtl::Json::array();
    for (const auto &h : m->value.model.heads())
      heads.push_back({{"name", h.name}, {"classes", h.n_classes}, {"lambda", h.lambda}});
    pmtl::Json j = {{"network", pmtl::ToJson(m->value.model.config())},
                    {"train", pmtl::ToJson(m->value.train_config)},
                    {"heads", heads},
                    {"input_width", m->value.model.input_width()},
                    {"trunk_sizes", m->value.model.trunk_sizes()},
                    {"best_epoch", m->value.best_epoch}};
    *out_json = CopyString(j.dump());
  });
}

// ------------------------------------------------------------------ HLF / ELM

pmtl_status pmtl_hlf_compute(const pmtl_matrix *posteriors, double theta, double out16[16]) {
  return Guard([&] {
    Need(posteriors, "posteriors");
    Need(out16, "out16");
    auto v = pmtl::ComputeHlf(posteriors->value, theta);
    for (int k = 0; k < pmtl::kHlfDim; ++k) out16[k] = v.values[k];
  });
}

pmtl_status pmtl_elm_fit(const pmtl_matrix *x, const int *labels, int n_classes,
                         const char *elm_json, pmtl_elm **out) {
  return Guard([&] {
    Need(x, "x");
    Need(labels, "labels");
    Need(out, "out");
    if (n_classes < 2) pmtl::Fail(pmtl::ErrorCode::kInvalidArgument, "n_classes must be >= 2");
    auto cfg = ParseConfig<pmtl::ElmConfig>(elm_json, "elm config");
    pmtl::nn::Matrix y = pmtl::nn::Matrix::Zero(x->value.rows(), n_classes);
    for (int64_t i = 0; i < x->value.rows(); ++i) {
      if (labels[i] < 0 || labels[i] >= n_classes)
        pmtl::Fail(pmtl::ErrorCode::kInvalidArgument, "label out of range");
      y(i, labels[i]) = 1.0;
    }
    *out = new pmtl_elm{pmtl::ElmFit(x->value, y, cfg)};
  });
}

pmtl_status pmtl_elm_predict(const pmtl_elm *e, const pmtl_matrix *x, pmtl_matrix **scores,
                             int *labels) {
  return Guard([&] {
    Need(e, "elm");
    Need(x, "x");
    auto p = pmtl::ElmPredict(e->value, x->value);
    if (labels)
      for (size_t i = 0; i < p.labels.size(); ++i) labels[i] = p.labels[i];
    if (scores) *scores = NewMatrix(std::move(p.scores));
  });
}

pmtl_status pmtl_elm_save(const pmtl_elm *e, const char *path) {
  return Guard([&] {
    Need(e, "elm");
    Need(path, "path");
    pmtl::SaveElm(e->value, path);
  });
}

pmtl_status pmtl_elm_load(const char *path, pmtl_elm **out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    *out = new pmtl_elm{pmtl::LoadElm(path)};
  });
}

void pmtl_elm_free(pmtl_elm *e) { delete e; }

// ------------------------------------------------------------------ metrics

pmtl_status pmtl_unweighted_accuracy(const int64_t counts[16], double *ua) {
  return Guard([&] {
    Need(counts, "counts");
    Need(ua, "ua");
    pmtl::ConfusionMatrix cm;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        if (counts[4 * a + b] < 0)
          pmtl::Fail(pmtl::ErrorCode::kInvalidArgument, "negative confusion count");
        cm.counts[a][b] = counts[4 * a + b];
      }
    *ua = pmtl::UnweightedAccuracy(cm);
  });
}

pmtl_status pmtl_wilcoxon(const double *a, const double *b, size_t n, double alpha,
                          pmtl_wilcoxon_result *out) {
  return Guard([&] {
    Need(a, "a");
    Need(b, "b");
    Need(out, "out");
    auto r = pmtl::WilcoxonSignedRank(std::span<const double>(a, n), std::span<const double>(b, n),
                                      alpha);
    *out = {r.w_plus, r.w_minus, r.n, r.p_value, r.significant ? 1 : 0, r.exact ? 1 : 0};
  });
}

// ------------------------------------------------------------------ t-SNE

pmtl_status pmtl_tsne(const pmtl_matrix *x, const char *tsne_json, pmtl_matrix **out,
                      double *final_kl) {
  return Guard([&] {
    Need(x, "x");
    Need(out, "out");
    auto cfg = ParseConfig<pmtl::TsneConfig>(tsne_json, "tsne config");
    auto r = pmtl::TsneEmbed(x->value, cfg);
    if (final_kl) *final_kl = r.kl_trace.back();
    *out = NewMatrix(std::move(r.embedding));
  });
}

// ------------------------------------------------------------------ reports

void pmtl_report_free(pmtl_report *r) { delete r; }

size_t pmtl_report_count(const pmtl_report *r) { return r ? r->value.reports.size() : 0; }

double pmtl_report_mean_ua(const pmtl_report *r, size_t i) {
  if (!r || i >= r->value.reports.size()) return std::numeric_limits<double>::quiet_NaN();
  return r->value.reports[i].mean_ua;
}

pmtl_status pmtl_report_json(const pmtl_report *r, char **out_json) {
  return Guard([&] {
    Need(r, "report");
    Need(out_json, "out_json");
    pmtl::Json reports = pmtl::Json::array();
    for (const auto &rep : r->value.reports) reports.push_back(pmtl::ToJson(rep));
    pmtl::Json j = {{"reports", reports}};
    if (r->grid) j["table"] = pmtl::ToJson(r->value.table);
    *out_json = CopyString(j.dump());
  });
}

}  // extern "C"
