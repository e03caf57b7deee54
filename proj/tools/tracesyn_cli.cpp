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

// Command-line front end over the C API.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tracesyn/tracesyn.h"

namespace {

int exit_code(tsyn_status status) {
  switch (status) {
    case TSYN_OK: return 0;
    case TSYN_INVALID_ARGUMENT:
    case TSYN_CONFIG_ERROR: return 2;
    case TSYN_DATA_ERROR:
    case TSYN_IO_ERROR: return 3;
    case TSYN_BUDGET_ERROR: return 4;
    default: return 1;
  }
}

int fail(tsyn_status status) {
  std::fprintf(stderr, "tracesyn: %s\n", tsyn_last_error());
  return exit_code(status);
}

// Flag value per config key; only flags given on the command line are set.
struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }
};

int run(const std::string& command, const Overrides& o, bool print_report) {
  tsyn_config* config = nullptr;
  tsyn_status s = o.config_path.empty() ? tsyn_config_new(&config) : tsyn_config_load(o.config_path.c_str(), &config);
  if (s != TSYN_OK) return fail(s);
  for (const auto& [key, value] : o.values) {
    s = tsyn_config_set(config, key.c_str(), value.c_str());
    if (s != TSYN_OK) {
      tsyn_config_free(config);
      return fail(s);
    }
  }
  tsyn_report* report = nullptr;
  if (command == "synthesize") {
    s = tsyn_synthesize(config, &report);
  } else if (command == "eval") {
    s = tsyn_evaluate(config, &report);
  } else {
    s = tsyn_inspect_marginals(config, &report);
  }
  tsyn_config_free(config);
  if (s != TSYN_OK) return fail(s);
  if (print_report) std::printf("%s\n", tsyn_report_json(report));
  tsyn_report_free(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private network trace synthesis"};
  app.set_version_flag("--version", std::string(tsyn_version()));
  app.require_subcommand(1);

  Overrides synth;
  Overrides eval;
  Overrides inspect;
  bool quiet = false;

  auto common = [](CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config_path, "JSON run config; flags override it");
    o.add(sub, "--schema", "schema", "schema JSON");
    o.add(sub, "--seed", "seed", "master seed");
    o.add(sub, "--report", "report", "report path");
  };
  auto privacy = [](CLI::App* sub, Overrides& o) {
    o.add(sub, "--input", "input", "raw trace CSV");
    o.add(sub, "--epsilon", "epsilon", "privacy epsilon");
    o.add(sub, "--delta", "delta", "privacy delta");
    o.add(sub, "--group-key", "group_key", "comma-separated group identifier attributes");
    o.add(sub, "--rules", "rules", "protocol rules JSON");
    o.add(sub, "--tau", "tau", "port-protocol tolerance");
  };

  auto* s = app.add_subcommand("synthesize", "publish marginals and synthesise a trace");
  common(s, synth);
  privacy(s, synth);
  synth.add(s, "--output", "output", "synthetic CSV path");
  synth.add(s, "--distances", "distances", "per-iteration distance CSV path");
  synth.add(s, "--key-attribute", "synthesis.key_attribute", "initialisation key attribute");
  synth.add(s, "--iterations", "synthesis.iterations", "maximum update iterations");
  synth.add(s, "--n-records", "synthesis.n_records", "synthetic record count");
  synth.add(s, "--init-marginals", "synthesis.init_marginals", "tables used for initialisation");
  synth.add(s, "--init", "synthesis.init", "marginal, uniform or independent");
  s->add_flag("--quiet", quiet, "do not print the run report");

  auto* e = app.add_subcommand("eval", "score a synthetic trace against the raw one");
  common(e, eval);
  eval.add(e, "--raw", "input", "raw trace CSV");
  eval.add(e, "--syn", "synthetic", "synthetic trace CSV");
  e->add_option_function<std::vector<std::string>>(
       "--metrics",
       [&eval](const std::vector<std::string>& m) {
         std::string list = "[";
         for (std::size_t i = 0; i < m.size(); ++i) list += (i ? ",\"" : "\"") + m[i] + "\"";
         eval.values["metrics"] = list + "]";
       },
       "any of jsd, emd, cms, cs")
      ->delimiter(',');
  eval.add(e, "--sketch-width", "sketch.width", "sketch width");
  eval.add(e, "--sketch-depth", "sketch.depth", "sketch depth");

  auto* m = app.add_subcommand("inspect-marginals", "print the published, post-processed marginals");
  common(m, inspect);
  privacy(m, inspect);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }
  if (s->parsed()) return run("synthesize", synth, !quiet);
  if (e->parsed()) return run("eval", eval, true);
  return run("inspect-marginals", inspect, true);
}
