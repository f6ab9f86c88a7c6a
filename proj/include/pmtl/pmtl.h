/* include/pmtl/pmtl.h */

/* Copyright  2026  pmtl authors */

/* See ../../COPYING for clarification regarding multiple authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 *
 * THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
 * WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
 * MERCHANTABLITY OR NON-INFRINGEMENT.
 * See the Apache 2 License for the specific language governing permissions and
 * limitations under the License. */

#ifndef PMTL_PMTL_H_
#define PMTL_PMTL_H_

/* C interface to the multi-task emotion recognition toolkit.
 *
 * Every function returns a pmtl_status. On failure the thread's last error
 * message is set and can be read with pmtl_last_error() until the next call
 * on the same thread. Objects are opaque and owned by the caller, who
 * releases them with the matching *_free function (NULL is accepted).
 * Strings returned through char** are released with pmtl_string_free.
 * Configuration is passed as JSON text; NULL or "" means all defaults, and
 * unknown keys are rejected. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(PMTL_BUILDING_LIBRARY)
#define PMTL_API __declspec(dllexport)
#else
#define PMTL_API __declspec(dllimport)
#endif
#else
#define PMTL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pmtl_status {
  PMTL_OK = 0,
  PMTL_ERR_INVALID_ARGUMENT = 1,
  PMTL_ERR_IO = 2,
  PMTL_ERR_PARSE = 3,
  PMTL_ERR_NUMERIC = 4,
  PMTL_ERR_STATE = 5,
  PMTL_ERR_INTERNAL = 6
} pmtl_status;

typedef struct pmtl_manifest pmtl_manifest;
typedef struct pmtl_matrix pmtl_matrix;
typedef struct pmtl_model pmtl_model;
typedef struct pmtl_elm pmtl_elm;
typedef struct pmtl_report pmtl_report;

PMTL_API const char *pmtl_version(void);
PMTL_API const char *pmtl_last_error(void);
PMTL_API const char *pmtl_status_string(pmtl_status status);
PMTL_API void pmtl_string_free(char *s);

/* ---- dense row-major double matrices ---- */
PMTL_API pmtl_status pmtl_matrix_create(size_t rows, size_t cols, const double *data,
                                        pmtl_matrix **out);
PMTL_API void pmtl_matrix_free(pmtl_matrix *m);
PMTL_API size_t pmtl_matrix_rows(const pmtl_matrix *m);
PMTL_API size_t pmtl_matrix_cols(const pmtl_matrix *m);
/* Borrowed pointer, valid while the matrix lives. */
PMTL_API const double *pmtl_matrix_data(const pmtl_matrix *m);

/* ---- corpora ---- */
PMTL_API pmtl_status pmtl_manifest_load(const char *path, pmtl_manifest **out);
PMTL_API pmtl_status pmtl_manifest_write(const pmtl_manifest *m, const char *path);
PMTL_API void pmtl_manifest_free(pmtl_manifest *m);
PMTL_API size_t pmtl_manifest_size(const pmtl_manifest *m);
/* Per-corpus counts (speakers, emotions, gender, naturalness) as JSON. */
PMTL_API pmtl_status pmtl_manifest_summary_json(const pmtl_manifest *m, char **out_json);
/* Writes <out_dir>/manifest.csv, WAVs and config.json. `out` may be NULL. */
PMTL_API pmtl_status pmtl_synth_generate(const char *synth_json, const char *out_dir,
                                         pmtl_manifest **out);

/* ---- frame features (n_frames x 32) ---- */
PMTL_API pmtl_status pmtl_features_from_samples(const double *samples, size_t n,
                                                int sample_rate, const char *features_json,
                                                pmtl_matrix **out);
PMTL_API pmtl_status pmtl_features_from_wav(const char *wav_path, const char *features_json,
                                            pmtl_matrix **out);
PMTL_API pmtl_status pmtl_features_read(const char *path, pmtl_matrix **out);
PMTL_API pmtl_status pmtl_features_write(const pmtl_matrix *m, const char *path);
PMTL_API pmtl_status pmtl_features_write_csv(const pmtl_matrix *m, const char *path);

/* ---- run-level stages; run_json follows the RunConfig layout ---- */
PMTL_API pmtl_status pmtl_features_stage(const char *run_json, const char *out_dir, int csv,
                                         int *n_written);
PMTL_API pmtl_status pmtl_train_stage(const char *run_json, const char *out_dir,
                                      pmtl_model **out);
PMTL_API pmtl_status pmtl_hlf_stage(const char *run_json, const char *model_path,
                                    const char *out_csv);
/* test_csv may be NULL or "". `ua` may be NULL. */
PMTL_API pmtl_status pmtl_elm_stage(const char *train_csv, const char *test_csv,
                                    const char *elm_json, uint64_t seed, const char *out_dir,
                                    double *ua);
PMTL_API pmtl_status pmtl_xval_stage(const char *run_json, const char *out_dir,
                                     pmtl_report **out);
PMTL_API pmtl_status pmtl_embed_stage(const char *hlf_csv, const char *tsne_json,
                                      const char *out_dir, pmtl_matrix **embedding);
PMTL_API pmtl_status pmtl_report_stage(const char *const *run_dirs, size_t n_runs,
                                       const char *out_dir, char **table_json);
/* Fully resolved RunConfig with defaults filled in. */
PMTL_API pmtl_status pmtl_run_config_resolve(const char *run_json, char **out_json);

/* ---- trained multi-task models ---- */
PMTL_API pmtl_status pmtl_model_load(const char *path, pmtl_model **out);
PMTL_API pmtl_status pmtl_model_save(const pmtl_model *m, const char *path);
PMTL_API void pmtl_model_free(pmtl_model *m);
/* Emotion posteriors: one row per frame (LSTM) or per context window (DNN). */
PMTL_API pmtl_status pmtl_model_posteriors(const pmtl_model *m, const pmtl_matrix *features,
                                           pmtl_matrix **out);
PMTL_API pmtl_status pmtl_model_info_json(const pmtl_model *m, char **out_json);

/* ---- utterance-level features ---- */
PMTL_API pmtl_status pmtl_hlf_compute(const pmtl_matrix *posteriors, double theta,
                                      double out16[16]);

/* ---- extreme learning machine ---- */
PMTL_API pmtl_status pmtl_elm_fit(const pmtl_matrix *x, const int *labels, int n_classes,
                                  const char *elm_json, pmtl_elm **out);
/* scores: m x n_classes; labels (may be NULL): m entries. */
PMTL_API pmtl_status pmtl_elm_predict(const pmtl_elm *e, const pmtl_matrix *x,
                                      pmtl_matrix **scores, int *labels);
PMTL_API pmtl_status pmtl_elm_save(const pmtl_elm *e, const char *path);
PMTL_API pmtl_status pmtl_elm_load(const char *path, pmtl_elm **out);
PMTL_API void pmtl_elm_free(pmtl_elm *e);

/* ---- metrics ---- */
/* counts: 4x4 row-major, rows = true class. */
PMTL_API pmtl_status pmtl_unweighted_accuracy(const int64_t counts[16], double *ua);

typedef struct pmtl_wilcoxon_result {
  double w_plus;
  double w_minus;
  int n;
  double p_value;
  int significant;
  int exact;
} pmtl_wilcoxon_result;

PMTL_API pmtl_status pmtl_wilcoxon(const double *a, const double *b, size_t n, double alpha,
                                   pmtl_wilcoxon_result *out);

/* ---- t-SNE ---- */
PMTL_API pmtl_status pmtl_tsne(const pmtl_matrix *x, const char *tsne_json, pmtl_matrix **out,
                               double *final_kl);

/* ---- experiment reports ---- */
PMTL_API void pmtl_report_free(pmtl_report *r);
/* Number of configurations (1, or 8 for a grid). */
PMTL_API size_t pmtl_report_count(const pmtl_report *r);
/* Mean UA of configuration i over complete folds (NaN when none). */
PMTL_API double pmtl_report_mean_ua(const pmtl_report *r, size_t i);
PMTL_API pmtl_status pmtl_report_json(const pmtl_report *r, char **out_json);

#ifdef __cplusplus
}
#endif

#endif /* PMTL_PMTL_H_ */
