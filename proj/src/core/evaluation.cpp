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

#include "evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "error.hpp"
#include "json.hpp"
#include "rng.hpp"
#include "sketch.hpp"

namespace tracesyn {
namespace {

double xlog2(double x, double y) { return x > 0.0 ? x * std::log2(x / y) : 0.0; }

std::vector<double> normalized(std::span<const double> v, const char* what) {
  double total = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw invalid_argument(std::string(what) + ": masses must be finite and non-negative");
    total += x;
  }
  if (total <= 0.0) throw invalid_argument(std::string(what) + ": zero mass");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= total;
  return out;
}

WeightedValues numeric_histogram(const TraceDataset& d, std::size_t column) {
  std::map<double, double> counts;
  for (const auto& r : d.records) counts[numeric_value(r.values[column])] += 1.0;
  return {counts.begin(), counts.end()};
}

std::map<std::string, double> label_histogram(const TraceDataset& d, std::size_t column) {
  std::map<std::string, double> counts;
  FieldKind kind = d.schema[column].kind;
  for (const auto& r : d.records) counts[format_value(kind, r.values[column])] += 1.0;
  return counts;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void validate(const SketchConfig& config) {
  if (config.width < 1 || config.depth < 1) throw config_error("sketch width and depth must be >= 1");
  if (!(config.heavy_hitter_fraction > 0.0 && config.heavy_hitter_fraction < 1.0)) {
    throw config_error("heavy_hitter_fraction must lie in (0, 1)");
  }
  if (config.runs < 1) throw config_error("sketch runs must be >= 1");
}

std::string_view to_string(SketchAlgorithm algorithm) noexcept {
  return algorithm == SketchAlgorithm::kCountMin ? "cms" : "cs";
}

double jsd(std::span<const double> p, std::span<const double> q) {
  if (p.empty() || q.empty()) throw invalid_argument("jsd: empty histogram");
  if (p.size() != q.size()) throw invalid_argument("jsd: histograms are not aligned");
  auto pn = normalized(p, "jsd");
  auto qn = normalized(q, "jsd");
  double d = 0.0;
  for (std::size_t i = 0; i < pn.size(); ++i) {
    double m = 0.5 * (pn[i] + qn[i]);
    d += 0.5 * xlog2(pn[i], m) + 0.5 * xlog2(qn[i], m);
  }
  return std::clamp(d, 0.0, 1.0);
}

double jsd(const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
  std::set<std::string> keys;
  for (const auto& [k, v] : p) keys.insert(k);
  for (const auto& [k, v] : q) keys.insert(k);
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& k : keys) {
    auto ip = p.find(k);
    auto iq = q.find(k);
    a.push_back(ip == p.end() ? 0.0 : ip->second);
    b.push_back(iq == q.end() ? 0.0 : iq->second);
  }
  return jsd(a, b);
}

double emd_1d(const WeightedValues& p, const WeightedValues& q) {
  auto masses = [](const WeightedValues& w) {
    std::vector<double> m;
    for (const auto& [v, x] : w) {
      if (!std::isfinite(v)) throw invalid_argument("emd_1d: non-finite value");
      m.push_back(x);
    }
    return m;
  };
  auto pm = masses(p);
  auto qm = masses(q);
  if (pm.empty() || qm.empty()) throw invalid_argument("emd_1d: zero mass");
  pm = normalized(pm, "emd_1d");
  qm = normalized(qm, "emd_1d");
  // Merge both supports; integrate |F_p - F_q| between consecutive points.
  std::vector<std::pair<double, double>> events;
  for (std::size_t i = 0; i < p.size(); ++i) events.emplace_back(p[i].first, pm[i]);
  for (std::size_t i = 0; i < q.size(); ++i) events.emplace_back(q[i].first, -qm[i]);
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double diff = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    diff += events[i].second;
    total += std::abs(diff) * (events[i + 1].first - events[i].first);
  }
  return total;
}

std::vector<double> normalize_emds(const std::vector<double>& emds) {
  if (emds.empty()) return {};
  auto [lo, hi] = std::minmax_element(emds.begin(), emds.end());
  std::vector<double> out;
  for (double e : emds) out.push_back(*hi > *lo ? 0.1 + 0.8 * (e - *lo) / (*hi - *lo) : 0.5);
  return out;
}

double relative_error(double v_syn, double v_raw) {
  double diff = std::abs(v_syn - v_raw);
  if (v_raw == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / std::abs(v_raw);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw invalid_argument("spearman_rank: length mismatch");
  if (a.size() < 2) throw invalid_argument("spearman_rank: need at least two items");
  auto ra = average_ranks(a);
  auto rb = average_ranks(b);
  double n = static_cast<double>(a.size());
  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::uint64_t sketch_key(const std::string& text) noexcept { return mix64(fnv1a(text)); }

std::map<std::string, std::uint64_t> exact_counts(const TraceDataset& dataset, const std::string& attribute) {
  auto column = dataset.find(attribute);
  if (!column) throw data_error("attribute '" + attribute + "' not in dataset");
  FieldKind kind = dataset.schema[*column].kind;
  std::map<std::string, std::uint64_t> counts;
  for (const auto& r : dataset.records) ++counts[format_value(kind, r.values[*column])];
  return counts;
}

double sketch_error(const std::map<std::string, std::uint64_t>& counts, SketchAlgorithm algorithm,
                    const SketchConfig& config, std::uint64_t seed, std::size_t* heavy_hitters) {
  validate(config);
  std::uint64_t n = 0;
  for (const auto& [k, c] : counts) n += c;
  const double threshold = config.heavy_hitter_fraction * static_cast<double>(n);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> heavy;
  for (const auto& [k, c] : counts) {
    if (static_cast<double>(c) >= threshold) heavy.emplace_back(sketch_key(k), c);
  }
  if (heavy_hitters) *heavy_hitters = heavy.size();
  if (heavy.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t run = 0; run < config.runs; ++run) {
    std::uint64_t run_seed = substream_seed(seed, "sketch/run/" + std::to_string(run));
    double err = 0.0;
    if (algorithm == SketchAlgorithm::kCountMin) {
      CountMinSketch s(config.width, config.depth, run_seed);
      for (const auto& [k, c] : counts) s.insert(sketch_key(k), c);
      for (const auto& [key, c] : heavy) err += std::abs(static_cast<double>(s.query(key)) - static_cast<double>(c));
    } else {
      CountSketch s(config.width, config.depth, run_seed);
      for (const auto& [k, c] : counts) s.insert(sketch_key(k), static_cast<std::int64_t>(c));
      for (const auto& [key, c] : heavy) err += std::abs(s.query(key) - static_cast<double>(c));
    }
    total += err / static_cast<double>(heavy.size());
  }
  return total / static_cast<double>(config.runs);
}

HeavyHitterResult heavy_hitter_error(const TraceDataset& raw, const TraceDataset& syn,
                                     const std::string& attribute, SketchAlgorithm algorithm,
                                     const SketchConfig& config, std::uint64_t seed) {
  HeavyHitterResult out;
  out.err_raw = sketch_error(exact_counts(raw, attribute), algorithm, config, seed, &out.raw_heavy_hitters);
  out.err_syn = sketch_error(exact_counts(syn, attribute), algorithm, config, seed, &out.syn_heavy_hitters);
  out.relative_error = out.raw_heavy_hitters == 0 ? std::numeric_limits<double>::infinity()
                                                  : relative_error(out.err_syn, out.err_raw);
  return out;
}

std::string FidelityReport::to_json() const {
  nlohmann::json j;
  j["metadata"] = {{"seed", seed},
                   {"epsilon", epsilon ? nlohmann::json(*epsilon) : nlohmann::json(nullptr)},
                   {"runtime_seconds", runtime_seconds},
                   {"raw_records", raw_records},
                   {"syn_records", syn_records}};
  j["attributes"] = nlohmann::json::array();
  for (const auto& a : attributes) {
    j["attributes"].push_back({{"attribute", a.attribute}, {"metric", a.metric}, {"value", a.value}});
  }
  j["sketches"] = nlohmann::json::array();
  for (const auto& s : sketches) {
    j["sketches"].push_back({{"attribute", s.attribute},
                             {"algorithm", std::string(to_string(s.algorithm))},
                             {"err_raw", s.result.err_raw},
                             {"err_syn", s.result.err_syn},
                             {"relative_error", number_or_null(s.result.relative_error)},
                             {"relative_error_infinite", std::isinf(s.result.relative_error)},
                             {"raw_heavy_hitters", s.result.raw_heavy_hitters},
                             {"syn_heavy_hitters", s.result.syn_heavy_hitters}});
  }
  j["reserved"] = {{"univmon", nullptr}, {"nitrosketch", nullptr}};
  return j.dump(2);
}

std::string FidelityReport::to_csv() const {
  std::ostringstream os;
  os << "section,attribute,metric,value\n";
  for (const auto& a : attributes) os << "attribute," << a.attribute << ',' << a.metric << ',' << csv_number(a.value) << '\n';
  for (const auto& s : sketches) {
    os << "sketch," << s.attribute << ',' << to_string(s.algorithm) << ',' << csv_number(s.result.relative_error)
       << '\n';
  }
  return os.str();
}

FidelityReport evaluate(const TraceDataset& raw, const TraceDataset& syn, const EvalOptions& options) {
  auto start = std::chrono::steady_clock::now();
  validate(options.sketch);
  static const std::set<std::string> known = {"jsd", "emd", "cms", "cs"};
  std::set<std::string> metrics(options.metrics.begin(), options.metrics.end());
  for (const auto& m : metrics) {
    if (!known.count(m)) throw config_error("unknown metric '" + m + "' (expected jsd, emd, cms, cs)");
  }
  if (metrics.empty()) metrics = known;
  if (raw.schema.size() != syn.schema.size()) throw data_error("raw and synthetic schemas differ in width");
  for (std::size_t c = 0; c < raw.schema.size(); ++c) {
    auto s = syn.find(raw.schema[c].name);
    if (!s || syn.schema[*s].kind != raw.schema[c].kind) {
      throw data_error("synthetic schema does not match raw at attribute '" + raw.schema[c].name + "'");
    }
  }
  if (raw.records.empty() || syn.records.empty()) throw data_error("cannot evaluate an empty dataset");

  FidelityReport report;
  report.seed = options.seed;
  report.epsilon = options.epsilon;
  report.raw_records = raw.records.size();
  report.syn_records = syn.records.size();
  for (std::size_t c = 0; c < raw.schema.size(); ++c) {
    const auto& field = raw.schema[c];
    std::size_t sc = *syn.find(field.name);
    bool unordered = field.kind == FieldKind::kIp || field.kind == FieldKind::kPort ||
                     field.kind == FieldKind::kCategorical;
    if (unordered && metrics.count("jsd")) {
      report.attributes.push_back({field.name, "jsd", jsd(label_histogram(raw, c), label_histogram(syn, sc))});
    } else if (!unordered && metrics.count("emd")) {
      report.attributes.push_back({field.name, "emd", emd_1d(numeric_histogram(raw, c), numeric_histogram(syn, sc))});
    }
  }
  std::vector<std::string> sketch_attrs = options.sketch_attributes;
  if (sketch_attrs.empty()) {
    for (const auto& f : raw.schema) {
      if (f.kind == FieldKind::kIp || f.kind == FieldKind::kPort) sketch_attrs.push_back(f.name);
    }
  }
  for (const auto& attr : sketch_attrs) {
    for (auto algorithm : {SketchAlgorithm::kCountMin, SketchAlgorithm::kCountSketch}) {
      if (!metrics.count(std::string(to_string(algorithm)))) continue;
      report.sketches.push_back({attr, algorithm, heavy_hitter_error(raw, syn, attr, algorithm, options.sketch, options.seed)});
    }
  }
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace tracesyn
