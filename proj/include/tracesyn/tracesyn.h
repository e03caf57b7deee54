// Copyright 2026 The tracesyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the tracesyn library. Every function returns a status code;
 * on failure tsyn_last_error() describes it (per thread). Objects are opaque
 * and released with their _free function. */

#ifndef TRACESYN_TRACESYN_H_
#define TRACESYN_TRACESYN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(TSYN_BUILDING_LIBRARY)
#define TSYN_API __attribute__((visibility("default")))
#else
#define TSYN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tsyn_status {
  TSYN_OK = 0,
  TSYN_INVALID_ARGUMENT = 1,
  TSYN_CONFIG_ERROR = 2,
  TSYN_DATA_ERROR = 3,
  TSYN_BUDGET_ERROR = 4,
  TSYN_IO_ERROR = 5,
  TSYN_INTERNAL_ERROR = 6
} tsyn_status;

typedef struct tsyn_config tsyn_config;
typedef struct tsyn_report tsyn_report;
typedef struct tsyn_dataset tsyn_dataset;

TSYN_API const char* tsyn_version(void);
/* Message of the last failed call on this thread; "" after success. */
TSYN_API const char* tsyn_last_error(void);

TSYN_API tsyn_status tsyn_config_new(tsyn_config** out);
TSYN_API tsyn_status tsyn_config_from_json(const char* json, tsyn_config** out);
TSYN_API tsyn_status tsyn_config_load(const char* path, tsyn_config** out);
/* key uses dots for nested fields, e.g. "synthesis.iterations". */
TSYN_API tsyn_status tsyn_config_set(tsyn_config* config, const char* key, const char* value);
/* Owned by the config; valid until the next call on it. */
TSYN_API tsyn_status tsyn_config_json(tsyn_config* config, const char** out);
TSYN_API void tsyn_config_free(tsyn_config* config);

/* Writes the synthetic CSV (and report/distance files) to config.output and
 * returns the run report. `report` may be NULL. */
TSYN_API tsyn_status tsyn_synthesize(const tsyn_config* config, tsyn_report** report);
TSYN_API tsyn_status tsyn_evaluate(const tsyn_config* config, tsyn_report** report);
TSYN_API tsyn_status tsyn_inspect_marginals(const tsyn_config* config, tsyn_report** report);

/* Owned by the report. */
TSYN_API const char* tsyn_report_json(const tsyn_report* report);
TSYN_API tsyn_status tsyn_report_write(const tsyn_report* report, const char* path);
TSYN_API void tsyn_report_free(tsyn_report* report);

TSYN_API tsyn_status tsyn_dataset_load(const char* csv_path, const char* schema_path, tsyn_dataset** out);
TSYN_API tsyn_status tsyn_dataset_write(const tsyn_dataset* dataset, const char* csv_path);
TSYN_API size_t tsyn_dataset_num_records(const tsyn_dataset* dataset);
TSYN_API size_t tsyn_dataset_num_attributes(const tsyn_dataset* dataset);
TSYN_API void tsyn_dataset_free(tsyn_dataset* dataset);

/* zCDP rho for (epsilon, delta)-DP. */
TSYN_API tsyn_status tsyn_eps_delta_to_rho(double epsilon, double delta, double* rho);

#ifdef __cplusplus
}
#endif

#endif  /* TRACESYN_TRACESYN_H_ */
