/* Copyright 2026 The nerpipe Authors.
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

/* C interface of the nerpipe library.
 *
 * Every function returns a ner_status; NER_OK is zero. On failure the
 * calling thread's error message (and source line, for parse errors) can be
 * read back with ner_last_error_message() / ner_last_error_line() until the
 * next failing call on that thread.
 *
 * Strings returned through `char**` out-parameters are UTF-8, NUL
 * terminated, owned by the caller and released with ner_string_free().
 * Option and result payloads are JSON objects; unknown option keys are
 * rejected with NER_E_CONFIG.
 */

#ifndef NERPIPE_NERPIPE_H_
#define NERPIPE_NERPIPE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NER_API __declspec(dllexport)
#else
#define NER_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define NER_VERSION_STRING "1.0.0"

typedef enum {
  NER_OK = 0,
  NER_E_INVALID_ARGUMENT = 10,
  NER_E_USAGE = 11,
  NER_E_PARSE = 20,
  NER_E_INVARIANT = 21,
  NER_E_OVERLAP = 22,
  NER_E_RANGE = 23,
  NER_E_UNKNOWN_LABEL = 24,
  NER_E_SHAPE_MISMATCH = 25,
  NER_E_INVALID_GOLD = 26,
  NER_E_INFEASIBLE = 27,
  NER_E_VERSION = 28,
  NER_E_CORRUPTION = 29,
  NER_E_EMPTY_DICTIONARY = 30,
  NER_E_DATA = 31,
  NER_E_UNKNOWN_SENTENCE = 32,
  NER_E_ID_MISMATCH = 33,
  NER_E_EMPTY_CORPUS = 34,
  NER_E_CONFIG = 35,
  NER_E_STORE_CORRUPTION = 36,
  NER_E_IO = 37,
  NER_E_DIVERGENCE = 40,
  NER_E_BIND = 41,
  NER_E_INTERNAL = 50
} ner_status;

typedef struct ner_model ner_model;
typedef struct ner_dataset ner_dataset;
typedef struct ner_matcher ner_matcher;
typedef struct ner_review_server ner_review_server;

/* ---- errors, versions, memory ------------------------------------------ */

NER_API const char* ner_version(void);
NER_API uint32_t ner_model_format_version(void);
/* Symbolic name such as "OverlapError"; "OK" for NER_OK. */
NER_API const char* ner_status_name(ner_status status);
NER_API const char* ner_last_error_message(void);
/* 1-based input line of the last parse error, 0 if none. */
NER_API long ner_last_error_line(void);
NER_API void ner_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

/* format: "jsonl" or "column". options: {"repair": bool, "layer": str} */
NER_API ner_status ner_dataset_load(const char* path, const char* format,
                                    const char* options_json,
                                    ner_dataset** out);
NER_API ner_status ner_dataset_save(const ner_dataset* dataset,
                                    const char* path, const char* format);
NER_API size_t ner_dataset_size(const ner_dataset* dataset);
/* {"id", "text", "layers": {name: [{"start","end","label"}...]}} */
NER_API ner_status ner_dataset_sentence_json(const ner_dataset* dataset,
                                             size_t index, char** out_json);
NER_API void ner_dataset_free(ner_dataset* dataset);

/* ---- gazetteer --------------------------------------------------------- */

/* options: {"min_surface_len": int, "abbreviations": bool,
 *           "rules_path": str} */
NER_API ner_status ner_matcher_build(const char* dict_path,
                                     const char* options_json,
                                     ner_matcher** out);
/* Leftmost-longest spans as a JSON array. */
NER_API ner_status ner_matcher_match(const ner_matcher* matcher,
                                     const char* text, char** out_json);
NER_API void ner_matcher_free(ner_matcher* matcher);

/* Adds layer `layer` (default "coarse") to every sentence of `in_path` and
 * writes `out_path`. `secondary_path` (nullable) is a replay file of
 * {"id","spans"} lines merged where it does not overlap dictionary matches.
 * result: {"sentences", "matcher_spans", "secondary_spans", "warnings"} */
NER_API ner_status ner_annotate(const ner_matcher* matcher,
                                const char* in_path, const char* out_path,
                                const char* secondary_path,
                                const char* layer, char** out_result_json);

/* ---- models ------------------------------------------------------------ */

NER_API ner_status ner_model_load(const char* path, ner_model** out);
NER_API ner_status ner_model_save(const ner_model* model, const char* path);
/* Spans for one UTF-8 sentence as a JSON array. */
NER_API ner_status ner_model_predict_text(const ner_model* model,
                                          const char* text, char** out_json);
/* {"labels", "constrained", "emitter": {...}, "train_seed"} */
NER_API ner_status ner_model_info_json(const ner_model* model, char** out_json);
NER_API void ner_model_free(ner_model* model);

/* ---- pipeline stages (file based) -------------------------------------- */

/* Training options: {"learning_rate", "l2", "decay", "max_epochs",
 * "patience", "seed", "labels", "constrained", "window", "hash_bits",
 * "hash_seed", "train_layer", "dev_layer"}. Result payloads carry the
 * per-epoch dev-F1 history. */

NER_API ner_status ner_synth(const char* config_json, const char* out_dir,
                             char** out_result_json);
NER_API ner_status ner_train_outline(const char* train_path,
                                     const char* dev_path,
                                     const char* model_out,
                                     const char* options_json,
                                     char** out_result_json);
NER_API ner_status ner_train_detail(const char* model_in,
                                    const char* corrected_path,
                                    const char* dev_path,
                                    const char* model_out,
                                    const char* options_json,
                                    char** out_result_json);
NER_API ner_status ner_select(const char* model_path, const char* coarse_path,
                              const char* layer, const char* store_out,
                              int threads, char** out_result_json);
/* Answers every pending record of a store from `gold_layer` of a dataset. */
NER_API ner_status ner_oracle_correct(const char* store_path,
                                      const char* gold_path,
                                      const char* gold_layer,
                                      const char* annotator_id,
                                      char** out_result_json);
NER_API ner_status ner_export_corrected(const char* store_path,
                                       const char* out_path,
                                       char** out_result_json);
NER_API ner_status ner_distill(const char* teacher_path,
                               const char* unlabeled_path,
                               const char* out_path, size_t max_len,
                               int threads, char** out_result_json);
NER_API ner_status ner_train_student(const char* pseudo_path,
                                     const char* dev_path,
                                     const char* model_out,
                                     const char* options_json,
                                     char** out_result_json);
/* Writes `in_path` plus layer `layer` with the model's predictions. The
 * input format is detected from its contents; `format` ("jsonl" or
 * "column") selects the output. A column file keeps only the new layer. */
NER_API ner_status ner_predict(const char* model_path, const char* in_path,
                               const char* out_path, const char* layer,
                               int threads, const char* format);

/* ---- evaluation -------------------------------------------------------- */

/* {"precision", "recall", "f1", "true_positives", ...} */
NER_API ner_status ner_eval(const char* predicted_path,
                            const char* predicted_layer,
                            const char* gold_path, const char* gold_layer,
                            char** out_result_json);
NER_API ner_status ner_bench(const char* model_path, const char* corpus_path,
                             int warmup, int threads, int repeats,
                             char** out_result_json);
/* runs_jsonl: run records, one JSON object per line. Result:
 * {"table": str, "jsonl": str} */
NER_API ner_status ner_report(const char* runs_jsonl, char** out_result_json);

/* ---- end-to-end pipeline ----------------------------------------------- */

typedef void (*ner_log_fn)(const char* line, void* user_data);

/* stop_after: nullable stage name. Result: the pipeline state. */
NER_API ner_status ner_pipeline_run(const char* config_json,
                                    const char* stop_after, ner_log_fn log,
                                    void* user_data, char** out_state_json);
NER_API ner_status ner_pipeline_status(const char* config_json,
                                       char** out_state_json);

/* ---- review server ----------------------------------------------------- */

/* options: {"store", "dataset", "bind", "ui_dir", "labels"}. Binds and
 * serves on a background thread. */
NER_API ner_status ner_review_server_start(const char* options_json,
                                           ner_review_server** out);
NER_API int ner_review_server_port(const ner_review_server* server);
/* Blocks until ner_review_server_stop is called from another thread. */
NER_API void ner_review_server_wait(ner_review_server* server);
NER_API void ner_review_server_stop(ner_review_server* server);
NER_API void ner_review_server_free(ner_review_server* server);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* NERPIPE_NERPIPE_H_ */
