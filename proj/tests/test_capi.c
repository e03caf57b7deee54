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

/* Exercises the public C interface through the shared library only. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "tracesyn/tracesyn.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s (%s)\n", __FILE__, __LINE__, #cond, \
              tsyn_last_error());                                      \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static void join(char* out, size_t size, const char* dir, const char* name) {
  snprintf(out, size, "%s/%s", dir, name);
}

static int write_inputs(const char* csv, const char* schema) {
  FILE* f = fopen(schema, "w");
  if (!f) return 0;
  fputs("[{\"name\":\"ts\",\"kind\":\"timestamp\"},{\"name\":\"srcip\",\"kind\":\"ip\"},"
        "{\"name\":\"dstport\",\"kind\":\"port\"},{\"name\":\"proto\",\"kind\":\"categorical\"},"
        "{\"name\":\"pkt\",\"kind\":\"integer\"},{\"name\":\"byt\",\"kind\":\"integer\"},"
        "{\"name\":\"type\",\"kind\":\"categorical\",\"role\":\"label\"}]",
        f);
  fclose(f);
  f = fopen(csv, "w");
  if (!f) return 0;
  fputs("ts,srcip,dstport,proto,pkt,byt,type\n", f);
  unsigned long long state = 7;
  static const int ports[] = {53, 80, 443, 21, 22};
  for (int i = 0; i < 1500; ++i) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    unsigned r = (unsigned)(state >> 33);
    int port = ports[r % 5];
    int pkt = 1 + (int)(r % 40);
    fprintf(f, "%lld,10.0.%u.%u,%d,%s,%d,%d,%s\n", 1600000000000LL + i * 37LL, (r >> 8) % 4, (r >> 4) % 16, port,
            port == 53 ? "udp" : "tcp", pkt, pkt * (40 + (int)(r % 1400)), (r >> 12) % 7 == 0 ? "attack" : "normal");
  }
  fclose(f);
  return 1;
}

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: capi_test <scratch dir>\n");
    return 2;
  }
  char csv[1024], schema[1024], out[1024], report_path[1024];
  join(csv, sizeof csv, argv[1], "raw.csv");
  join(schema, sizeof schema, argv[1], "schema.json");
  join(out, sizeof out, argv[1], "syn.csv");
  join(report_path, sizeof report_path, argv[1], "copy.json");
  if (!write_inputs(csv, schema)) {
    fprintf(stderr, "cannot write inputs under %s\n", argv[1]);
    return 2;
  }

  EXPECT(strlen(tsyn_version()) > 0);

  double rho = 0.0;
  EXPECT(tsyn_eps_delta_to_rho(2.0, 1e-5, &rho) == TSYN_OK);
  EXPECT(fabs(rho - 0.0800454) < 1e-6);
  EXPECT(tsyn_eps_delta_to_rho(-1.0, 1e-5, &rho) != TSYN_OK);
  EXPECT(strlen(tsyn_last_error()) > 0);
  EXPECT(tsyn_eps_delta_to_rho(2.0, 1e-5, NULL) == TSYN_INVALID_ARGUMENT);

  tsyn_config* config = NULL;
  EXPECT(tsyn_config_new(&config) == TSYN_OK);
  EXPECT(tsyn_config_set(config, "input", csv) == TSYN_OK);
  EXPECT(tsyn_config_set(config, "schema", schema) == TSYN_OK);
  EXPECT(tsyn_config_set(config, "output", out) == TSYN_OK);
  EXPECT(tsyn_config_set(config, "seed", "5") == TSYN_OK);
  EXPECT(tsyn_config_set(config, "no_such_key", "1") == TSYN_CONFIG_ERROR);
  EXPECT(tsyn_config_set(NULL, "seed", "1") == TSYN_INVALID_ARGUMENT);

  const char* json = NULL;
  EXPECT(tsyn_config_json(config, &json) == TSYN_OK);
  tsyn_config* copy = NULL;
  EXPECT(tsyn_config_from_json(json, &copy) == TSYN_OK);
  tsyn_config_free(copy);
  copy = NULL;
  EXPECT(tsyn_config_from_json("{\"bogus\":1}", &copy) == TSYN_CONFIG_ERROR);
  EXPECT(copy == NULL);

  tsyn_report* report = NULL;
  EXPECT(tsyn_synthesize(config, &report) == TSYN_OK);
  if (report) {
    EXPECT(strstr(tsyn_report_json(report), "\"ledger\"") != NULL);
    EXPECT(tsyn_report_write(report, report_path) == TSYN_OK);
    tsyn_report_free(report);
  }
  EXPECT(tsyn_synthesize(config, NULL) == TSYN_OK);

  tsyn_dataset* syn = NULL;
  EXPECT(tsyn_dataset_load(out, schema, &syn) == TSYN_OK);
  if (syn) {
    EXPECT(tsyn_dataset_num_records(syn) > 1000);
    EXPECT(tsyn_dataset_num_attributes(syn) == 7);
    tsyn_dataset_free(syn);
  }
  EXPECT(tsyn_dataset_load("/nonexistent.csv", schema, &syn) == TSYN_IO_ERROR);

  EXPECT(tsyn_config_set(config, "synthetic", out) == TSYN_OK);
  tsyn_report* eval = NULL;
  EXPECT(tsyn_evaluate(config, &eval) == TSYN_OK);
  if (eval) {
    EXPECT(strstr(tsyn_report_json(eval), "\"attributes\"") != NULL);
    tsyn_report_free(eval);
  }

  tsyn_report* inspect = NULL;
  EXPECT(tsyn_inspect_marginals(config, &inspect) == TSYN_OK);
  tsyn_report_free(inspect);

  EXPECT(tsyn_config_set(config, "budget_fractions.publish", "0.9") == TSYN_OK);
  EXPECT(tsyn_synthesize(config, NULL) == TSYN_BUDGET_ERROR);
  EXPECT(tsyn_config_set(config, "budget_fractions.publish", "0.8") == TSYN_OK);
  EXPECT(tsyn_config_set(config, "input", "/nonexistent.csv") == TSYN_OK);
  EXPECT(tsyn_synthesize(config, NULL) == TSYN_IO_ERROR);

  tsyn_config_free(config);
  tsyn_config_free(NULL);
  tsyn_report_free(NULL);
  tsyn_dataset_free(NULL);

  if (failures == 0) printf("capi: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
