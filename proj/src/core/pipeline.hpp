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

// End-to-end orchestration: raw CSV in, synthetic CSV and run report out.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "binning.hpp"
#include "evaluation.hpp"
#include "postprocess.hpp"
#include "privacy.hpp"
#include "synth.hpp"
#include "trace.hpp"

namespace tracesyn {

struct RunConfig {
  std::string input;
  std::string schema;
  std::string output;
  std::string report;     // empty: <output>.report.json
  std::string distances;  // empty: <output>.distances.csv
  std::string synthetic;  // eval only
  double epsilon = 2.0;
  double delta = 1e-5;
  std::uint64_t seed = 0;
  BudgetFractions fractions;
  BinningConfig binning;
  std::uint64_t merge_threshold = 10000;
  double tau = 0.1;
  std::string rules;  // empty: default rules for the schema
  std::optional<std::vector<std::string>> group_key;
  SynthConfig synthesis;
  std::vector<std::string> metrics;
  SketchConfig sketch;

  std::string to_json() const;
  static RunConfig from_json(std::string_view text);
  static RunConfig load(const std::string& path);
  // Sets one key from a string; nested keys use dots ("synthesis.iterations").
  void set(const std::string& key, const std::string& value);
  void validate() const;
};

std::vector<std::string> default_group_key(const Schema& schema);
std::string default_key_attribute(const Schema& schema);

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

struct SynthesizeOutput {
  TraceDataset dataset;
  std::string report_json;
  std::string distances_csv;
  double rho_total = 0.0;
  double rho_consumed = 0.0;
};

// Runs the full pipeline. Writes output, report and distance log when
// config.output is set.
SynthesizeOutput run_synthesize(const RunConfig& config);

// Scores config.synthetic against config.input. Writes the report (JSON, and
// CSV next to it) when config.report is set.
FidelityReport run_eval(const RunConfig& config);

// Publishes and post-processes the marginal set without synthesising;
// returns the tables as JSON. Spends the same budget as a synthesis run.
std::string inspect_marginals(const RunConfig& config);

std::string distances_to_csv(const SynthState& state, const std::vector<Marginal>& targets);

}  // namespace tracesyn
