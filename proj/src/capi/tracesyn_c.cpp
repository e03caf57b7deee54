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

#include "tracesyn/tracesyn.h"

#include <exception>
#include <new>
#include <string>

#include "error.hpp"
#include "io.hpp"
#include "pipeline.hpp"
#include "privacy.hpp"
#include "trace.hpp"

struct tsyn_config {
  tracesyn::RunConfig config;
  std::string json;
};

struct tsyn_report {
  std::string json;
};

struct tsyn_dataset {
  tracesyn::TraceDataset dataset;
};

namespace {

thread_local std::string last_error;

tsyn_status status_of(tracesyn::ErrorKind kind) {
  switch (kind) {
    case tracesyn::ErrorKind::kInvalidArgument: return TSYN_INVALID_ARGUMENT;
    case tracesyn::ErrorKind::kConfig: return TSYN_CONFIG_ERROR;
    case tracesyn::ErrorKind::kData: return TSYN_DATA_ERROR;
    case tracesyn::ErrorKind::kBudget: return TSYN_BUDGET_ERROR;
    case tracesyn::ErrorKind::kIo: return TSYN_IO_ERROR;
  }
  return TSYN_INTERNAL_ERROR;
}

template <typename F>
tsyn_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return TSYN_OK;
  } catch (const tracesyn::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return TSYN_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return TSYN_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return TSYN_INTERNAL_ERROR;
  }
}

tsyn_status null_argument(const char* what) {
  last_error = std::string(what) + " must not be NULL";
  return TSYN_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* tsyn_version(void) { return "0.1.0"; }

const char* tsyn_last_error(void) { return last_error.c_str(); }

tsyn_status tsyn_config_new(tsyn_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new tsyn_config{}; });
}

tsyn_status tsyn_config_from_json(const char* json, tsyn_config** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new tsyn_config{tracesyn::RunConfig::from_json(json), {}}; });
}

tsyn_status tsyn_config_load(const char* path, tsyn_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new tsyn_config{tracesyn::RunConfig::load(path), {}}; });
}

tsyn_status tsyn_config_set(tsyn_config* config, const char* key, const char* value) {
  if (!config) return null_argument("config");
  if (!key) return null_argument("key");
  if (!value) return null_argument("value");
  return guarded([&] { config->config.set(key, value); });
}

tsyn_status tsyn_config_json(tsyn_config* config, const char** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    config->json = config->config.to_json();
    *out = config->json.c_str();
  });
}

void tsyn_config_free(tsyn_config* config) { delete config; }

tsyn_status tsyn_synthesize(const tsyn_config* config, tsyn_report** report) {
  if (!config) return null_argument("config");
  return guarded([&] {
    auto out = tracesyn::run_synthesize(config->config);
    if (report) *report = new tsyn_report{std::move(out.report_json)};
  });
}

tsyn_status tsyn_evaluate(const tsyn_config* config, tsyn_report** report) {
  if (!config) return null_argument("config");
  return guarded([&] {
    auto out = tracesyn::run_eval(config->config);
    if (report) *report = new tsyn_report{out.to_json()};
  });
}

tsyn_status tsyn_inspect_marginals(const tsyn_config* config, tsyn_report** report) {
  if (!config) return null_argument("config");
  if (!report) return null_argument("report");
  return guarded([&] { *report = new tsyn_report{tracesyn::inspect_marginals(config->config)}; });
}

const char* tsyn_report_json(const tsyn_report* report) { return report ? report->json.c_str() : ""; }

tsyn_status tsyn_report_write(const tsyn_report* report, const char* path) {
  if (!report) return null_argument("report");
  if (!path) return null_argument("path");
  return guarded([&] { tracesyn::write_text(path, report->json); });
}

void tsyn_report_free(tsyn_report* report) { delete report; }

tsyn_status tsyn_dataset_load(const char* csv_path, const char* schema_path, tsyn_dataset** out) {
  if (!csv_path) return null_argument("csv_path");
  if (!schema_path) return null_argument("schema_path");
  if (!out) return null_argument("out");
  return guarded([&] {
    auto schema = tracesyn::load_schema(schema_path);
    *out = new tsyn_dataset{tracesyn::load_csv(csv_path, schema)};
  });
}

tsyn_status tsyn_dataset_write(const tsyn_dataset* dataset, const char* csv_path) {
  if (!dataset) return null_argument("dataset");
  if (!csv_path) return null_argument("csv_path");
  return guarded([&] { tracesyn::write_csv(dataset->dataset, csv_path); });
}

size_t tsyn_dataset_num_records(const tsyn_dataset* dataset) { return dataset ? dataset->dataset.size() : 0; }

size_t tsyn_dataset_num_attributes(const tsyn_dataset* dataset) {
  return dataset ? dataset->dataset.schema.size() : 0;
}

void tsyn_dataset_free(tsyn_dataset* dataset) { delete dataset; }

tsyn_status tsyn_eps_delta_to_rho(double epsilon, double delta, double* rho) {
  if (!rho) return null_argument("rho");
  return guarded([&] { *rho = tracesyn::eps_delta_to_rho(epsilon, delta); });
}

}  // extern "C"
