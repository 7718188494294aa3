/* Copyright 2026 The Trajcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/* C API for the trajcast motion-forecasting library.
 *
 * All functions return trajcast_code; on failure trajcast_last_error()
 * holds a message describing what went wrong (thread-local). Objects are
 * opaque handles released with the matching *_free function. Strings
 * returned through char** out-parameters are heap-allocated and released
 * with trajcast_string_free.
 *
 * Error codes double as process exit codes: 2 usage, 3 data, 4 numeric.
 */

#ifndef TRAJCAST_TRAJCAST_H_
#define TRAJCAST_TRAJCAST_H_

#include <stdint.h>

#if defined(_WIN32)
#define TRAJCAST_API __declspec(dllexport)
#else
#define TRAJCAST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum trajcast_code {
  TRAJCAST_OK = 0,
  TRAJCAST_ERR_USAGE = 2,   /* bad flags or malformed configuration */
  TRAJCAST_ERR_DATA = 3,    /* missing or invalid input files */
  TRAJCAST_ERR_NUMERIC = 4, /* non-finite values or numeric failures */
} trajcast_code;

typedef struct trajcast_config trajcast_config;
typedef struct trajcast_scenes trajcast_scenes;
typedef struct trajcast_model trajcast_model;
typedef struct trajcast_predictions trajcast_predictions;

TRAJCAST_API const char* trajcast_version(void);
TRAJCAST_API const char* trajcast_last_error(void);
TRAJCAST_API void trajcast_string_free(char* s);

/* Configuration ---------------------------------------------------------- */
TRAJCAST_API trajcast_code trajcast_config_default(trajcast_config** out);
TRAJCAST_API trajcast_code trajcast_config_load(const char* path,
                                                trajcast_config** out);
TRAJCAST_API trajcast_code trajcast_config_parse(const char* json_text,
                                                 trajcast_config** out);
TRAJCAST_API trajcast_code trajcast_config_dump(const trajcast_config* cfg,
                                                char** json_out);
TRAJCAST_API trajcast_code trajcast_config_hash(const trajcast_config* cfg,
                                                char** hash_out);
/* Overrides both the data and training seeds. */
TRAJCAST_API trajcast_code trajcast_config_set_seed(trajcast_config* cfg,
                                                    uint64_t seed);
TRAJCAST_API void trajcast_config_free(trajcast_config* cfg);

/* Scenes ----------------------------------------------------------------- */
/* n_scenes <= 0 uses the config's scenes_count. */
TRAJCAST_API trajcast_code trajcast_generate(const trajcast_config* cfg,
                                             int64_t n_scenes,
                                             const char* out_path);
TRAJCAST_API trajcast_code trajcast_scenes_load(const char* path,
                                                trajcast_scenes** out);
TRAJCAST_API int64_t trajcast_scenes_count(const trajcast_scenes* scenes);
TRAJCAST_API void trajcast_scenes_free(trajcast_scenes* scenes);

/* Model ------------------------------------------------------------------ */
TRAJCAST_API trajcast_code trajcast_train(const trajcast_config* cfg,
                                          const trajcast_scenes* scenes,
                                          const char* loss_csv_path,
                                          trajcast_model** out);
TRAJCAST_API trajcast_code trajcast_model_save(const trajcast_model* model,
                                               const char* path);
TRAJCAST_API trajcast_code trajcast_model_load(const trajcast_config* cfg,
                                               const char* path,
                                               trajcast_model** out);
TRAJCAST_API int64_t
trajcast_model_parameter_count(const trajcast_model* model);
TRAJCAST_API void trajcast_model_free(trajcast_model* model);

/* Predictions ------------------------------------------------------------ */
TRAJCAST_API trajcast_code trajcast_predict(const trajcast_model* model,
                                            const trajcast_scenes* scenes,
                                            trajcast_predictions** out);
TRAJCAST_API trajcast_code trajcast_predictions_load(
    const char* path, trajcast_predictions** out);
TRAJCAST_API trajcast_code trajcast_predictions_save(
    const trajcast_predictions* preds, const char* path);
TRAJCAST_API trajcast_code trajcast_predictions_merge(
    const trajcast_predictions* const* sets, int64_t n,
    trajcast_predictions** out);
TRAJCAST_API trajcast_code trajcast_aggregate(
    const trajcast_predictions* preds, const trajcast_config* cfg,
    trajcast_predictions** out);
TRAJCAST_API int64_t
trajcast_predictions_count(const trajcast_predictions* preds);
TRAJCAST_API void trajcast_predictions_free(trajcast_predictions* preds);

/* Evaluation and benchmarking -------------------------------------------- */
TRAJCAST_API trajcast_code trajcast_evaluate(const trajcast_predictions* preds,
                                             const trajcast_scenes* scenes,
                                             const trajcast_config* cfg,
                                             char** report_text,
                                             char** report_csv);
TRAJCAST_API trajcast_code trajcast_bench(const trajcast_config* cfg,
                                          const char* csv_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TRAJCAST_TRAJCAST_H_ */
