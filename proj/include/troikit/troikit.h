/* Copyright 2026 The troikit Authors. All Rights Reserved.

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

/* C interface to libtroikit. Every call returns a troikit_status; on failure
 * troikit_last_error() describes the problem until the next call on the same
 * thread. Handles are opaque and owned by the caller. */

#ifndef TROIKIT_TROIKIT_H_
#define TROIKIT_TROIKIT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TROIKIT_API __declspec(dllexport)
#else
#define TROIKIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum troikit_status {
  TROIKIT_OK = 0,
  TROIKIT_ERR_INTERNAL = 1,
  TROIKIT_ERR_USAGE = 2,       /* bad key, flag value or argument */
  TROIKIT_ERR_IO = 3,          /* missing or unreadable file */
  TROIKIT_ERR_NUMERIC = 4,     /* gradient check failed, training diverged */
  TROIKIT_ERR_DIMENSION = 5,   /* tensor shape mismatch */
  TROIKIT_ERR_INVALID_BOX = 6, /* ROI refers to a missing frame */
  TROIKIT_ERR_CONTRACT = 7     /* precondition violated */
} troikit_status;

#define TROIKIT_MAX_CLASSES 64

typedef struct troikit_config troikit_config;
typedef struct troikit_dataset troikit_dataset;
typedef struct troikit_model troikit_model;
typedef struct troikit_gradcheck troikit_gradcheck;

TROIKIT_API const char* troikit_version(void);
TROIKIT_API const char* troikit_last_error(void);
TROIKIT_API const char* troikit_status_name(troikit_status status);

/* ---- run configuration (key = value) ---- */
TROIKIT_API troikit_status troikit_config_create(troikit_config** out);
TROIKIT_API void troikit_config_destroy(troikit_config* config);
TROIKIT_API troikit_status troikit_config_set(troikit_config* config, const char* key, const char* value);
TROIKIT_API troikit_status troikit_config_load_file(troikit_config* config, const char* path);
TROIKIT_API troikit_status troikit_config_validate(const troikit_config* config);
/* Copies the value into buf (NUL-terminated); *needed gets the full length + 1. */
TROIKIT_API troikit_status troikit_config_get(const troikit_config* config, const char* key, char* buf, size_t cap,
                                              size_t* needed);

/* ---- datasets ---- */
typedef struct troikit_gen_options {
  size_t classes;
  size_t per_class;
  uint64_t seed;
  size_t frames;
  size_t size;
  int force;
} troikit_gen_options;

TROIKIT_API void troikit_gen_options_default(troikit_gen_options* options);
TROIKIT_API troikit_status troikit_dataset_generate(const char* dir, const troikit_gen_options* options,
                                                    size_t* count);
TROIKIT_API troikit_status troikit_dataset_load(const char* dir, troikit_dataset** out);
TROIKIT_API size_t troikit_dataset_size(const troikit_dataset* dataset);
TROIKIT_API void troikit_dataset_destroy(troikit_dataset* dataset);
/* Name of a synthetic action class, NULL when out of range. */
TROIKIT_API const char* troikit_class_name(size_t label);

/* ---- training ---- */
typedef struct troikit_epoch {
  size_t epoch;
  double lr;
  double train_loss;
  double val_top1;
  double val_topk;
} troikit_epoch;

typedef void (*troikit_epoch_callback)(const troikit_epoch* epoch, void* user);

/* Uses train, val, out, metrics and resume from the config. The checkpoint is
 * rewritten after every epoch. */
TROIKIT_API troikit_status troikit_train(const troikit_config* config, troikit_epoch_callback callback, void* user);

/* ---- models and evaluation ---- */
typedef struct troikit_metrics {
  size_t count;
  size_t k;
  double top1;
  double topk;
  size_t classes;
  double per_class[TROIKIT_MAX_CLASSES]; /* NaN when a class has no samples */
  size_t class_count[TROIKIT_MAX_CLASSES];
} troikit_metrics;

TROIKIT_API troikit_status troikit_model_load(const char* path, troikit_model** out);
TROIKIT_API void troikit_model_destroy(troikit_model* model);
/* Number of training epochs recorded in the checkpoint. */
TROIKIT_API size_t troikit_model_epoch(const troikit_model* model);
/* corrupt: NULL or "" for ground truth, else iou@0.50|iou@0.25|iou@0.05|
 * drop-hands|drop-objects|drop-all. */
TROIKIT_API troikit_status troikit_evaluate(const troikit_model* model, const troikit_dataset* dataset,
                                            const char* corrupt, size_t k, troikit_metrics* out);

/* ---- ablation ---- */
/* Trains one model per placement x depth (comma lists, e.g. "conv3,conv4,conv5"
 * and "1,2") and returns a tab-separated table in *table, freed with
 * troikit_string_free. */
TROIKIT_API troikit_status troikit_ablate(const troikit_config* config, const char* placements, const char* depths,
                                          char** table);
TROIKIT_API void troikit_string_free(char* s);

/* ---- gradient checks ---- */
/* op: NULL for all ops. perturb scales analytic gradients (test hook). */
TROIKIT_API troikit_status troikit_gradcheck_run(const char* op, uint64_t seed, size_t points, double perturb,
                                                 troikit_gradcheck** out);
TROIKIT_API size_t troikit_gradcheck_count(const troikit_gradcheck* report);
TROIKIT_API troikit_status troikit_gradcheck_row(const troikit_gradcheck* report, size_t index, const char** op,
                                                 double* max_rel_error, int* passed);
TROIKIT_API void troikit_gradcheck_destroy(troikit_gradcheck* report);

#ifdef __cplusplus
}
#endif

#endif /* TROIKIT_TROIKIT_H_ */
