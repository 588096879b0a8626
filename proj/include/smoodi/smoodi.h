/* Copyright 2026 The smoodi-desk Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the stylized motion diffusion library.
 *
 * Every call returns a smoodi_status; on failure smoodi_last_error() holds a
 * one-line diagnostic for the calling thread. Handles are opaque and owned by
 * the caller (destroy functions accept NULL).
 *
 * Motion buffers are row-major float arrays of SMOODI_FRAMES x
 * SMOODI_CHANNELS values per sequence in raw (denormalized) units, the same
 * units the CSV files carry. Content and style ids follow the label tables
 * (smoodi_content_name / smoodi_style_name); content SMOODI_NO_CONTENT means
 * "unconditioned".
 */

#ifndef SMOODI_SMOODI_H_
#define SMOODI_SMOODI_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SMOODI_BUILDING_LIBRARY)
#define SMOODI_API __attribute__((visibility("default")))
#else
#define SMOODI_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define SMOODI_FRAMES 64
#define SMOODI_CHANNELS 8
#define SMOODI_NUM_CONTENTS 6
#define SMOODI_NUM_STYLES 8
#define SMOODI_NO_CONTENT 6
#define SMOODI_HASH_LEN 16

typedef enum smoodi_status {
  SMOODI_OK = 0,
  SMOODI_ERR_INVALID_ARGUMENT = 1,
  SMOODI_ERR_SHAPE = 2,
  SMOODI_ERR_NON_FINITE = 3,
  SMOODI_ERR_IO = 4,
  SMOODI_ERR_FORMAT = 5,
  SMOODI_ERR_CONFIG = 6,
  SMOODI_ERR_MISSING_STAGE = 7,
  SMOODI_ERR_CHECKSUM = 8,
  SMOODI_ERR_GATE = 9,
  SMOODI_ERR_MIXED_CHECKPOINTS = 10,
  SMOODI_ERR_INTERNAL = 11
} smoodi_status;

typedef enum smoodi_stage {
  SMOODI_STAGE_DATA = 0,
  SMOODI_STAGE_CODEC = 1,
  SMOODI_STAGE_BASE = 2,
  SMOODI_STAGE_ORACLES = 3,
  SMOODI_STAGE_ADAPTOR = 4
} smoodi_stage;

typedef struct smoodi_config smoodi_config;
typedef struct smoodi_pipeline smoodi_pipeline;
typedef struct smoodi_models smoodi_models;

/* Receives one line of text (no trailing newline). */
typedef void (*smoodi_line_fn)(const char* line, void* user);

SMOODI_API const char* smoodi_version(void);
SMOODI_API const char* smoodi_status_string(smoodi_status status);
SMOODI_API const char* smoodi_last_error(void);

/* Labels. Names are the kebab-case forms, e.g. "walk-circle", "hurried". */
SMOODI_API const char* smoodi_content_name(int id);
SMOODI_API const char* smoodi_style_name(int id);
SMOODI_API smoodi_status smoodi_content_id(const char* name, int* id);
SMOODI_API smoodi_status smoodi_style_id(const char* name, int* id);

/* Run configuration: flat key=value pairs, every key defaulted. */
SMOODI_API smoodi_status smoodi_config_create(smoodi_config** out);
SMOODI_API void smoodi_config_destroy(smoodi_config* config);
SMOODI_API smoodi_status smoodi_config_load_file(smoodi_config* config, const char* path);
/* One "key=value" assignment; unknown keys are SMOODI_ERR_CONFIG. */
SMOODI_API smoodi_status smoodi_config_set(smoodi_config* config, const char* assignment);
/* Copies the value into buf (NUL-terminated, truncated to cap). *needed,
 * when non-NULL, receives the full length excluding the NUL. */
SMOODI_API smoodi_status smoodi_config_get(const smoodi_config* config, const char* key,
                                           char* buf, size_t cap, size_t* needed);
/* SMOODI_HASH_LEN hex digits plus NUL. */
SMOODI_API smoodi_status smoodi_config_hash(const smoodi_config* config,
                                            char out[SMOODI_HASH_LEN + 1]);
/* Calls fn once per "key=value" line, sorted by key. */
SMOODI_API smoodi_status smoodi_config_echo(const smoodi_config* config, smoodi_line_fn fn,
                                            void* user);

/* Staged pipeline over an artifact root. root NULL uses $SMOODI_OUT or
 * "out". log NULL discards progress lines. The config is copied. */
SMOODI_API smoodi_status smoodi_pipeline_create(const smoodi_config* config, const char* root,
                                                smoodi_line_fn log, void* log_user,
                                                smoodi_pipeline** out);
SMOODI_API void smoodi_pipeline_destroy(smoodi_pipeline* pipeline);
SMOODI_API smoodi_status smoodi_pipeline_run(smoodi_pipeline* pipeline, smoodi_stage stage,
                                             int force);
SMOODI_API smoodi_status smoodi_pipeline_stage_dir(const smoodi_pipeline* pipeline,
                                                   smoodi_stage stage, char* buf, size_t cap,
                                                   size_t* needed);
SMOODI_API smoodi_status smoodi_pipeline_stage_hash(const smoodi_pipeline* pipeline,
                                                    smoodi_stage stage,
                                                    char out[SMOODI_HASH_LEN + 1]);
SMOODI_API smoodi_status smoodi_pipeline_complete(const smoodi_pipeline* pipeline,
                                                  smoodi_stage stage, int* complete);
/* Unstyled content accuracy of the base model; SMOODI_ERR_GATE below the
 * configured threshold (the value is still written). */
SMOODI_API smoodi_status smoodi_pipeline_base_gate(smoodi_pipeline* pipeline, double* cra);
/* Copies corpus B's index-th sequence of the given style (wrapping). */
SMOODI_API smoodi_status smoodi_pipeline_style_reference(smoodi_pipeline* pipeline,
                                                         int style, size_t index,
                                                         float* frames);

/* Frozen model set for the pipeline's config. */
SMOODI_API smoodi_status smoodi_models_load(const smoodi_pipeline* pipeline, int with_adaptor,
                                            int allow_mixed, smoodi_models** out);
SMOODI_API void smoodi_models_destroy(smoodi_models* models);
SMOODI_API int smoodi_models_latent_dim(const smoodi_models* models);

typedef struct smoodi_sample_options {
  int use_adaptor;       /* 0 zeroes the adaptor residuals */
  smoodi_line_fn trace;  /* per-step "step=<t> G=<g> eps_norm=<n>" lines, or NULL */
  void* trace_user;
} smoodi_sample_options;

SMOODI_API smoodi_sample_options smoodi_sample_defaults(void);

/* n samples with weights, guidance and step count from the config.
 * style_frames may be NULL (no reference). g_final may be NULL. */
SMOODI_API smoodi_status smoodi_sample(const smoodi_pipeline* pipeline,
                                       const smoodi_models* models, const int* content,
                                       const uint64_t* seeds, const float* style_frames,
                                       size_t n, const smoodi_sample_options* options,
                                       float* out_frames, double* g_final);

/* Deterministic inversion of n sequences to z_T, written as n x latent_dim
 * floats, using the plain conditional prediction. */
SMOODI_API smoodi_status smoodi_invert(const smoodi_pipeline* pipeline,
                                       const smoodi_models* models, const float* frames,
                                       const int* content, size_t n, int steps, float* z_T);
/* Regenerates from z_T with the same conditional prediction as
 * smoodi_invert, closing the round trip. */
SMOODI_API smoodi_status smoodi_regenerate(const smoodi_pipeline* pipeline,
                                           const smoodi_models* models, const float* z_T,
                                           const int* content, size_t n, int steps,
                                           float* out_frames);

/* Inversion then stylized sampling with the transfer.* settings. */
SMOODI_API smoodi_status smoodi_transfer(const smoodi_pipeline* pipeline,
                                         const smoodi_models* models,
                                         const float* content_frames, const int* content,
                                         const float* style_frames, size_t n,
                                         float* out_frames, double* g_final);

typedef struct smoodi_eval_report {
  double sra;        /* evaluation-only style oracle */
  double sra_guide;  /* guidance style oracle */
  double cra;
  double ffd;
  int ffd_regularized;
  double diversity;
  double kinematic_violation;
  int samples;
} smoodi_eval_report;

/* Runs the evaluation protocol from the eval.* keys. report_dir, when not
 * NULL, receives report.txt and samples.csv. */
SMOODI_API smoodi_status smoodi_eval(smoodi_pipeline* pipeline, const smoodi_models* models,
                                     int use_style, int use_adaptor, const char* report_dir,
                                     smoodi_eval_report* out);

/* Motion CSV (header of channel names, %.9g values). provenance is a
 * newline-separated list of comment lines, or NULL. */
SMOODI_API smoodi_status smoodi_motion_write_csv(const char* path, const float* frames,
                                                 const char* provenance);
SMOODI_API smoodi_status smoodi_motion_read_csv(const char* path, float* frames);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* SMOODI_SMOODI_H_ */
