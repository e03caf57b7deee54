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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trace.hpp"

namespace tracesyn {

struct SketchConfig {
  std::size_t width = 256;
  std::size_t depth = 4;
  double heavy_hitter_fraction = 0.001;
  std::size_t runs = 10;
};

void validate(const SketchConfig& config);

enum class SketchAlgorithm { kCountMin, kCountSketch };
std::string_view to_string(SketchAlgorithm algorithm) noexcept;

// Base-2, on aligned histograms (normalised internally).
double jsd(std::span<const double> p, std::span<const double> q);
// Union-of-support alignment with zero fill.
double jsd(const std::map<std::string, double>& p, const std::map<std::string, double>& q);

using WeightedValues = std::vector<std::pair<double, double>>;  // (value, mass)
double emd_1d(const WeightedValues& p, const WeightedValues& q);
// Min-max rescale of a batch into [0.1, 0.9]; a constant batch maps to 0.5.
std::vector<double> normalize_emds(const std::vector<double>& emds);

// +inf when v_raw is 0 and v_syn is not.
double relative_error(double v_syn, double v_raw);
double spearman_rank(std::span<const double> a, std::span<const double> b);
std::vector<double> average_ranks(std::span<const double> values);

std::uint64_t sketch_key(const std::string& text) noexcept;
std::map<std::string, std::uint64_t> exact_counts(const TraceDataset& dataset, const std::string& attribute);

struct HeavyHitterResult {
  double err_raw = 0.0;
  double err_syn = 0.0;
  double relative_error = 0.0;
  std::size_t raw_heavy_hitters = 0;
  std::size_t syn_heavy_hitters = 0;
};

// Mean absolute sketch error on one dataset's heavy hitters, averaged over runs.
double sketch_error(const std::map<std::string, std::uint64_t>& counts, SketchAlgorithm algorithm,
                    const SketchConfig& config, std::uint64_t seed, std::size_t* heavy_hitters = nullptr);

HeavyHitterResult heavy_hitter_error(const TraceDataset& raw, const TraceDataset& syn,
                                     const std::string& attribute, SketchAlgorithm algorithm,
                                     const SketchConfig& config = {}, std::uint64_t seed = 0);

struct AttributeScore {
  std::string attribute;
  std::string metric;  // "jsd" or "emd"
  double value = 0.0;
};

struct SketchScore {
  std::string attribute;
  SketchAlgorithm algorithm = SketchAlgorithm::kCountMin;
  HeavyHitterResult result;
};

struct FidelityReport {
  std::vector<AttributeScore> attributes;
  std::vector<SketchScore> sketches;
  std::uint64_t seed = 0;
  std::optional<double> epsilon;
  double runtime_seconds = 0.0;
  std::size_t raw_records = 0;
  std::size_t syn_records = 0;

  std::string to_json() const;
  std::string to_csv() const;
};

struct EvalOptions {
  // Any of "jsd", "emd", "cms", "cs"; empty means all.
  std::vector<std::string> metrics;
  // Empty means every ip and port attribute.
  std::vector<std::string> sketch_attributes;
  SketchConfig sketch;
  std::uint64_t seed = 0;
  std::optional<double> epsilon;
};

FidelityReport evaluate(const TraceDataset& raw, const TraceDataset& syn, const EvalOptions& options = {});

}  // namespace tracesyn
