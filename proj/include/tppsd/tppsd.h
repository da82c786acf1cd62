// Copyright 2026 The tppsd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TPPSD_TPPSD_H_
#define TPPSD_TPPSD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(TPPSD_BUILDING_LIBRARY)
#define TPPSD_API __declspec(dllexport)
#else
#define TPPSD_API __declspec(dllimport)
#endif
#else
#define TPPSD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; the non-zero values double as process exit codes. */
typedef enum tppsd_status {
  TPPSD_OK = 0,
  TPPSD_ERR_USAGE = 1,
  TPPSD_ERR_DATA = 2,
  TPPSD_ERR_NUMERIC = 3,
  TPPSD_ERR_INTERNAL = 4
} tppsd_status;

typedef enum tppsd_policy {
  TPPSD_POLICY_POSITIONWISE = 0,
  TPPSD_POLICY_ALG1_LITERAL = 1
} tppsd_policy;

/* Message of the last failed call on this thread; empty after success. */
TPPSD_API const char* tppsd_last_error(void);
TPPSD_API const char* tppsd_version(void);

/* ---- opaque handles ---- */

typedef struct tppsd_model tppsd_model;
typedef struct tppsd_process tppsd_process;
typedef struct tppsd_sequence tppsd_sequence;

TPPSD_API tppsd_status tppsd_model_load(const char* path, tppsd_model** out);
TPPSD_API void tppsd_model_free(tppsd_model* model);
TPPSD_API tppsd_status tppsd_model_num_marks(const tppsd_model* model, int* out);
TPPSD_API tppsd_status tppsd_model_loglik(const tppsd_model* model, const tppsd_sequence* seq,
                                          double* out);

TPPSD_API tppsd_status tppsd_process_load(const char* path, tppsd_process** out);
TPPSD_API void tppsd_process_free(tppsd_process* process);
TPPSD_API tppsd_status tppsd_process_sample(const tppsd_process* process, double t_end,
                                            uint64_t seed, uint64_t stream,
                                            tppsd_sequence** out);
TPPSD_API tppsd_status tppsd_process_loglik(const tppsd_process* process,
                                            const tppsd_sequence* seq, double* out);

/* Sequences own copies of their events. */
TPPSD_API tppsd_status tppsd_sequence_create(const double* times, const int* marks, size_t n,
                                             double t_end, tppsd_sequence** out);
TPPSD_API void tppsd_sequence_free(tppsd_sequence* seq);
TPPSD_API size_t tppsd_sequence_size(const tppsd_sequence* seq);
TPPSD_API double tppsd_sequence_t_end(const tppsd_sequence* seq);
TPPSD_API tppsd_status tppsd_sequence_event(const tppsd_sequence* seq, size_t index,
                                            double* time, int* mark);

typedef struct tppsd_sample_stats {
  double wall_seconds;
  uint64_t events_drafted;
  uint64_t events_accepted;
  uint64_t target_forwards;
  uint64_t draft_forwards;
  uint64_t residual_fallbacks;
} tppsd_sample_stats;

/* Sampling with the random stream (seed, stream). stats may be NULL. */
TPPSD_API tppsd_status tppsd_sample_ar(const tppsd_model* target, double t_end, uint64_t seed,
                                       uint64_t stream, tppsd_sequence** out,
                                       tppsd_sample_stats* stats);
TPPSD_API tppsd_status tppsd_sample_sd(const tppsd_model* target, const tppsd_model* draft,
                                       double t_end, int gamma, tppsd_policy policy,
                                       uint64_t seed, uint64_t stream, tppsd_sequence** out,
                                       tppsd_sample_stats* stats);

/* ---- commands ----
 * Each command writes its outputs next to options->out together with
 * <out>.manifest.json. String fields may be NULL where optional. */

typedef struct tppsd_simulate_options {
  const char* process_path;
  uint64_t n;
  double t_end;
  uint64_t seed;
  const char* out;
} tppsd_simulate_options;

typedef struct tppsd_train_options {
  const char* data_path;
  const char* model_config_path;
  const char* train_config_path; /* NULL: defaults */
  int has_seed;                  /* non-zero: seed overrides the train config */
  uint64_t seed;
  const char* out;
} tppsd_train_options;

typedef struct tppsd_sample_options {
  const char* mode; /* "ar" or "sd" */
  const char* target_path;
  const char* draft_path;
  int gamma;
  double t_end;
  uint64_t runs;
  uint64_t seed;
  tppsd_policy policy;
  const char* out;
} tppsd_sample_options;

typedef struct tppsd_eval_options {
  const char* metric; /* "ks", "wasserstein" or "loglik" */
  const char* data_path;
  const char* process_path;
  const char* data_b_path;
  const char* scorer_a_path;
  const char* scorer_b_path;
  const char* target_path;
  const char* draft_path;
  uint64_t history_length;
  uint64_t repetitions;
  int gamma;
  uint64_t seed;
  const char* out;
} tppsd_eval_options;

typedef struct tppsd_bench_options {
  const char* target_path;
  const char* draft_path;
  const int* gammas;
  size_t num_gammas;
  uint64_t repetitions;
  double t_end;
  uint64_t seed;
  tppsd_policy policy;
  const char* out;
} tppsd_bench_options;

/* Fill an options struct with the documented defaults. */
TPPSD_API void tppsd_simulate_options_init(tppsd_simulate_options* options);
TPPSD_API void tppsd_train_options_init(tppsd_train_options* options);
TPPSD_API void tppsd_sample_options_init(tppsd_sample_options* options);
TPPSD_API void tppsd_eval_options_init(tppsd_eval_options* options);
TPPSD_API void tppsd_bench_options_init(tppsd_bench_options* options);

TPPSD_API tppsd_status tppsd_simulate(const tppsd_simulate_options* options);
TPPSD_API tppsd_status tppsd_train(const tppsd_train_options* options);
TPPSD_API tppsd_status tppsd_sample(const tppsd_sample_options* options);
TPPSD_API tppsd_status tppsd_eval(const tppsd_eval_options* options);
TPPSD_API tppsd_status tppsd_bench(const tppsd_bench_options* options);

/* Re-runs a manifest into out_dir. *identical is set to 1 when every
 * artifact matches the original (timing columns excluded). report, if not
 * NULL, receives a heap string (free with tppsd_string_free) with one line
 * per artifact. */
TPPSD_API tppsd_status tppsd_replay(const char* manifest_path, const char* out_dir,
                                    int* identical, char** report);
TPPSD_API void tppsd_string_free(char* s);

/* Warnings are forwarded here instead of stderr; NULL restores stderr. */
typedef void (*tppsd_warning_fn)(const char* message, void* user_data);
TPPSD_API void tppsd_set_warning_handler(tppsd_warning_fn fn, void* user_data);

#ifdef __cplusplus
}
#endif

#endif /* TPPSD_TPPSD_H_ */
