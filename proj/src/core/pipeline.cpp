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

#include "pipeline.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "error.hpp"
#include "io.hpp"
#include "json.hpp"
#include "marginal.hpp"
#include "selection.hpp"

namespace tracesyn {
namespace {

using nlohmann::json;

const char* split_name(MarginalSplit s) { return s == MarginalSplit::kEqual ? "equal" : "cells"; }

MarginalSplit parse_split(const std::string& s) {
  if (s == "cells") return MarginalSplit::kCellsTwoThirds;
  if (s == "equal") return MarginalSplit::kEqual;
  throw config_error("marginal_split must be 'cells' or 'equal', got '" + s + "'");
}

const char* init_name(InitMode m) {
  switch (m) {
    case InitMode::kMarginal: return "marginal";
    case InitMode::kUniform: return "uniform";
    case InitMode::kIndependent: return "independent";
  }
  return "marginal";
}

InitMode parse_init(const std::string& s) {
  if (s == "marginal") return InitMode::kMarginal;
  if (s == "uniform") return InitMode::kUniform;
  if (s == "independent") return InitMode::kIndependent;
  throw config_error("synthesis.init must be marginal, uniform or independent, got '" + s + "'");
}

// Reads j[key] into out when present, rejecting keys it does not know.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw config_error(where_ + " must be a JSON object");
  }
  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw config_error(where_ + key + ": wrong type");
    }
  }
  const json* child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw config_error("unknown config key '" + where_ + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json config_json(const RunConfig& c) {
  json j;
  j["input"] = c.input;
  j["schema"] = c.schema;
  j["output"] = c.output;
  j["report"] = c.report;
  j["distances"] = c.distances;
  j["synthetic"] = c.synthetic;
  j["epsilon"] = c.epsilon;
  j["delta"] = c.delta;
  j["seed"] = c.seed;
  j["budget_fractions"] = {{"binning", c.fractions.binning},
                           {"selection", c.fractions.selection},
                           {"publish", c.fractions.publish}};
  const auto& b = c.binning;
  j["binning"] = {{"ip_threshold_sigmas", b.ip_threshold_sigmas},
                  {"freq_threshold_sigmas", b.freq_threshold_sigmas},
                  {"freq_threshold", b.freq_threshold ? json(*b.freq_threshold) : json(nullptr)},
                  {"categorical_max_domain", b.categorical_max_domain},
                  {"log_bins", b.log_bins},
                  {"port_threshold", b.port_threshold},
                  {"port_width", b.port_width},
                  {"ts_window_ms", b.ts_window_ms},
                  {"max_ts_windows", b.max_ts_windows},
                  {"marginal_split", split_name(b.split)}};
  j["merge_threshold"] = c.merge_threshold;
  j["tau"] = c.tau;
  j["rules"] = c.rules;
  j["group_key"] = c.group_key ? json(*c.group_key) : json(nullptr);
  const auto& s = c.synthesis;
  j["synthesis"] = {{"n_records", s.n_records},
                    {"key_attribute", s.key_attribute},
                    {"init_marginals", s.n_init_marginals ? json(*s.n_init_marginals) : json(nullptr)},
                    {"iterations", s.max_iterations},
                    {"alpha0", s.alpha0},
                    {"alpha_decay", s.alpha_decay},
                    {"convergence_tol", s.convergence_tol},
                    {"duplicate_ratio", s.duplicate_ratio},
                    {"init", init_name(s.init)}};
  j["metrics"] = c.metrics;
  j["sketch"] = {{"width", c.sketch.width},
                 {"depth", c.sketch.depth},
                 {"heavy_hitter_fraction", c.sketch.heavy_hitter_fraction},
                 {"runs", c.sketch.runs}};
  return j;
}

RunConfig config_from(const json& j) {
  RunConfig c;
  Reader r(j, "");
  r.get("input", c.input);
  r.get("schema", c.schema);
  r.get("output", c.output);
  r.get("report", c.report);
  r.get("distances", c.distances);
  r.get("synthetic", c.synthetic);
  r.get("epsilon", c.epsilon);
  r.get("delta", c.delta);
  r.get("seed", c.seed);
  if (const json* f = r.child("budget_fractions")) {
    Reader fr(*f, "budget_fractions.");
    fr.get("binning", c.fractions.binning);
    fr.get("selection", c.fractions.selection);
    fr.get("publish", c.fractions.publish);
    fr.finish();
  }
  if (const json* b = r.child("binning")) {
    Reader br(*b, "binning.");
    auto& bc = c.binning;
    br.get("ip_threshold_sigmas", bc.ip_threshold_sigmas);
    br.get("freq_threshold_sigmas", bc.freq_threshold_sigmas);
    double freq = -1.0;
    br.get("freq_threshold", freq);
    if (freq >= 0.0) bc.freq_threshold = freq;
    br.get("categorical_max_domain", bc.categorical_max_domain);
    br.get("log_bins", bc.log_bins);
    br.get("port_threshold", bc.port_threshold);
    br.get("port_width", bc.port_width);
    br.get("ts_window_ms", bc.ts_window_ms);
    br.get("max_ts_windows", bc.max_ts_windows);
    std::string split = split_name(bc.split);
    br.get("marginal_split", split);
    bc.split = parse_split(split);
    br.finish();
  }
  r.get("merge_threshold", c.merge_threshold);
  r.get("tau", c.tau);
  r.get("rules", c.rules);
  if (const json* g = r.child("group_key")) {
    try {
      c.group_key = g->get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw config_error("group_key must be a list of attribute names");
    }
  }
  if (const json* s = r.child("synthesis")) {
    Reader sr(*s, "synthesis.");
    auto& sc = c.synthesis;
    sr.get("n_records", sc.n_records);
    sr.get("key_attribute", sc.key_attribute);
    std::size_t init_marginals = 0;
    sr.get("init_marginals", init_marginals);
    if (init_marginals > 0) sc.n_init_marginals = init_marginals;
    sr.get("iterations", sc.max_iterations);
    sr.get("alpha0", sc.alpha0);
    sr.get("alpha_decay", sc.alpha_decay);
    sr.get("convergence_tol", sc.convergence_tol);
    sr.get("duplicate_ratio", sc.duplicate_ratio);
    std::string init = init_name(sc.init);
    sr.get("init", init);
    sc.init = parse_init(init);
    sr.finish();
  }
  r.get("metrics", c.metrics);
  if (const json* k = r.child("sketch")) {
    Reader kr(*k, "sketch.");
    kr.get("width", c.sketch.width);
    kr.get("depth", c.sketch.depth);
    kr.get("heavy_hitter_fraction", c.sketch.heavy_hitter_fraction);
    kr.get("runs", c.sketch.runs);
    kr.finish();
  }
  r.finish();
  return c;
}

std::string with_suffix(const std::string& base, const std::string& explicit_path, const char* suffix) {
  return explicit_path.empty() ? base + suffix : explicit_path;
}

class StageClock {
 public:
  template <typename F>
  auto run(const std::string& stage, F&& f) {
    auto start = std::chrono::steady_clock::now();
    auto record = [&] {
      times_.push_back({stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
    };
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        record();
      } else {
        auto out = f();
        record();
        return out;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), stage + ": " + e.what());
    }
  }
  const std::vector<StageTime>& times() const { return times_; }

 private:
  std::vector<StageTime> times_;
};

struct Published {
  Schema schema;
  TraceDataset raw;
  std::vector<std::string> group_key;
  PrivacyBudget budget;
  FrequencyMergeResult binning;
  SelectionResult selection;
  std::vector<std::vector<std::string>> merged;
  std::vector<Marginal> targets;
  std::vector<ProtocolRule> rules;
  PostProcessReport post;
};

// Steps through publication and post-processing. All budget is spent here.
Published publish_marginals(const RunConfig& config, BudgetLedger& ledger, StageClock& clock) {
  Published p;
  clock.run("load", [&] {
    p.schema = load_schema(config.schema);
    p.raw = load_csv(config.input, p.schema);
    auto violations = validate_schema(p.raw);
    if (!violations.empty()) {
      std::string msg = std::to_string(violations.size()) + " validation error(s); first: " + to_string(violations.front());
      throw data_error(msg);
    }
  });
  p.group_key = config.group_key ? *config.group_key : default_group_key(p.schema);
  for (const auto& k : p.group_key) {
    if (!p.raw.find(k)) throw config_error("group key attribute '" + k + "' not in schema");
  }
  p.budget = allocate_budget(ledger.total(), config.fractions);
  p.budget.epsilon = config.epsilon;
  p.budget.delta = config.delta;

  TraceDataset augmented = clock.run("tsdiff", [&] {
    return timestamp_attribute(p.schema) ? add_tsdiff(p.raw, p.group_key) : p.raw;
  });
  BinMapping initial = clock.run("type-binning", [&] { return type_dependent_bins(augmented, config.binning); });
  p.binning = clock.run("frequency-binning", [&] {
    return frequency_dependent_merge(initial, augmented, p.budget.rho_binning, config.seed, config.binning, &ledger);
  });
  EncodedDataset encoded = clock.run("encode", [&] { return encode(augmented, p.binning.mapping, p.group_key); });
  augmented = TraceDataset{};

  clock.run("selection", [&] {
    auto candidates = build_candidates(encoded);
    ledger.consume("selection", p.budget.rho_selection);
    if (!candidates.empty()) {
      Rng rng(config.seed, "selection");
      p.selection = select_marginals(std::move(candidates), p.budget.rho_selection, p.budget.rho_publish, rng,
                                     config.binning.split);
    }
    std::vector<std::vector<std::string>> chosen;
    for (auto i : p.selection.order) chosen.push_back(p.selection.candidates[i].pair);
    p.merged = merge_small_marginals(chosen, encoded.attributes, encoded.domain_sizes, config.merge_threshold);
    if (p.merged.empty()) {
      for (const auto& a : encoded.attributes) p.merged.push_back({a});
    }
  });
  clock.run("publish", [&] {
    std::vector<Marginal> exact;
    for (const auto& set : p.merged) exact.push_back(compute_marginal(encoded, set));
    p.targets = publish(std::move(exact), p.budget.rho_publish, config.seed, config.binning.split, &ledger);
    for (auto& m : p.binning.one_way) p.targets.push_back(std::move(m));
    p.binning.one_way.clear();
  });
  ledger.seal();
  clock.run("post-process", [&] {
    if (config.rules.empty()) {
      p.rules = default_rules(p.schema);
      for (auto& r : p.rules) r.tau = config.tau;
    } else {
      p.rules = load_rules(config.rules);
    }
    p.post = post_process(p.targets, p.rules, p.binning.mapping);
  });
  return p;
}

json ledger_json(const BudgetLedger& ledger) {
  json entries = json::array();
  for (const auto& e : ledger.entries()) entries.push_back({{"stage", e.stage}, {"rho", e.rho}});
  return {{"rho_total", ledger.total()},
          {"rho_consumed", ledger.consumed()},
          {"rho_remaining", ledger.remaining()},
          {"sealed", ledger.sealed()},
          {"entries", entries}};
}

json budget_json(const PrivacyBudget& b) {
  return {{"epsilon", b.epsilon},
          {"delta", b.delta},
          {"rho_total", b.rho_total},
          {"rho_binning", b.rho_binning},
          {"rho_selection", b.rho_selection},
          {"rho_publish", b.rho_publish}};
}

std::string table_name(const Marginal& m) {
  std::string name;
  for (const auto& a : m.attributes) name += (name.empty() ? "" : "|") + a;
  return name;
}

}  // namespace

std::string RunConfig::to_json() const { return config_json(*this).dump(2); }

RunConfig RunConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from(j);
}

RunConfig RunConfig::load(const std::string& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw config_error(e.what());
  }
  return from_json(text);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  json j = config_json(*this);
  json* node = &j;
  std::size_t start = 0;
  for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
    std::string part = key.substr(start, dot - start);
    if (!node->is_object() || !node->contains(part)) throw config_error("unknown config key '" + key + "'");
    node = &(*node)[part];
  }
  std::string leaf = key.substr(start);
  if (!node->is_object() || !node->contains(leaf)) throw config_error("unknown config key '" + key + "'");
  json parsed = json::parse(value, nullptr, false);
  json& slot = (*node)[leaf];
  if (key == "group_key" && !parsed.is_array()) {
    json parts = json::array();
    std::stringstream ss(value);
    for (std::string part; std::getline(ss, part, ',');) {
      if (!part.empty()) parts.push_back(part);
    }
    slot = parts;
  } else if (slot.is_string() || parsed.is_discarded()) {
    slot = value;
  } else {
    slot = parsed;
  }
  *this = config_from(j);
}

void RunConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw config_error("epsilon must be a positive finite number");
  if (!(delta > 0.0 && delta < 1.0)) throw config_error("delta must lie in (0, 1)");
  if (!(tau >= 0.0 && tau <= 1.0)) throw config_error("tau must lie in [0, 1]");
  if (merge_threshold < 1) throw config_error("merge_threshold must be >= 1");
  if (binning.log_bins < 1) throw config_error("binning.log_bins must be >= 1");
  if (binning.port_width < 1) throw config_error("binning.port_width must be >= 1");
  if (binning.ts_window_ms < 1) throw config_error("binning.ts_window_ms must be >= 1");
  if (binning.max_ts_windows < 1) throw config_error("binning.max_ts_windows must be >= 1");
  if (!(binning.freq_threshold_sigmas >= 0.0) || !(binning.ip_threshold_sigmas >= 0.0)) {
    throw config_error("binning thresholds must be >= 0");
  }
  tracesyn::validate(synthesis);
  tracesyn::validate(sketch);
}

std::vector<std::string> default_group_key(const Schema& schema) {
  std::vector<std::string> key;
  for (const auto& f : schema) {
    if (f.role == FieldRole::kGroupIdentifierPart) key.push_back(f.name);
  }
  if (!key.empty()) return key;
  for (const char* name : {"srcip", "dstip", "srcport", "dstport", "proto"}) {
    for (const auto& f : schema) {
      if (f.name == name) key.push_back(f.name);
    }
  }
  return key;
}

std::string default_key_attribute(const Schema& schema) {
  for (const auto& f : schema) {
    if (f.role == FieldRole::kKeyAttribute) return f.name;
  }
  for (const auto& f : schema) {
    if (f.role == FieldRole::kLabel) return f.name;
  }
  return {};
}

std::string distances_to_csv(const SynthState& state, const std::vector<Marginal>& targets) {
  std::ostringstream os;
  os.precision(10);
  os << "iteration,rows_changed,mean";
  for (const auto& t : targets) os << ',' << table_name(t);
  os << '\n';
  for (std::size_t it = 0; it < state.distances.size(); ++it) {
    const auto& d = state.distances[it];
    double mean = 0.0;
    for (double x : d) mean += x;
    mean = d.empty() ? 0.0 : mean / static_cast<double>(d.size());
    os << it << ',' << (it == 0 ? 0 : state.rows_changed[it - 1]) << ',' << mean;
    for (double x : d) os << ',' << x;
    os << '\n';
  }
  return os.str();
}

SynthesizeOutput run_synthesize(const RunConfig& config) {
  config.validate();
  StageClock clock;
  BudgetLedger ledger(eps_delta_to_rho(config.epsilon, config.delta));
  Published p = publish_marginals(config, ledger, clock);

  SynthConfig sc = config.synthesis;
  if (sc.key_attribute.empty()) sc.key_attribute = default_key_attribute(p.schema);
  if (!sc.key_attribute.empty() && !p.binning.mapping.find(sc.key_attribute)) {
    throw config_error("key attribute '" + sc.key_attribute + "' not in schema");
  }
  const double consumed_before = ledger.consumed();
  SynthesisResult synth = clock.run("synthesize", [&] {
    return synthesize(p.targets, p.binning.mapping, p.schema, sc, p.rules, p.group_key, config.seed);
  });
  if (ledger.consumed() != consumed_before) throw budget_error("synthesis changed the privacy ledger");

  SynthesizeOutput out;
  out.rho_total = ledger.total();
  out.rho_consumed = ledger.consumed();
  out.distances_csv = distances_to_csv(synth.state, p.targets);

  json report;
  report["config"] = config_json(config);
  report["budget"] = budget_json(p.budget);
  report["ledger"] = ledger_json(ledger);
  report["group_key"] = p.group_key;
  report["key_attribute"] = sc.key_attribute;
  report["binning"] = {{"mapping", json::parse(mapping_to_json(p.binning.mapping))},
                       {"thresholds", p.binning.thresholds}};
  report["selection"] = p.selection.candidates.empty() ? json(nullptr) : json::parse(selection_to_json(p.selection));
  report["published_sets"] = p.merged;
  json tables = json::array();
  for (const auto& m : p.targets) tables.push_back(json::parse(marginal_summary_json(m, false)));
  report["marginals"] = tables;
  report["rules"] = json::parse(rules_to_json(p.rules));
  json shares = json::array();
  for (const auto& sh : p.post.shares) {
    shares.push_back({{"table", sh.table}, {"port_mass", sh.port_mass}, {"non_protocol_share", sh.non_protocol_share}});
  }
  report["post_process"] = {{"target_total", p.post.target_total},
                            {"uniform_fallbacks", p.post.uniform_fallbacks},
                            {"warnings", p.post.warnings},
                            {"port_protocol_shares", shares}};
  json init = json::array();
  for (auto i : synth.state.init_marginals) init.push_back(table_name(p.targets[i]));
  const auto& last = synth.state.distances.back();
  double final_mean = 0.0;
  for (double d : last) final_mean += d;
  final_mean = last.empty() ? 0.0 : final_mean / static_cast<double>(last.size());
  report["synthesis"] = {{"n_records", synth.dataset.size()},
                         {"iterations", synth.state.iterations},
                         {"init_marginals", init},
                         {"final_mean_distance", final_mean},
                         {"final_max_distance", last.empty() ? 0.0 : *std::max_element(last.begin(), last.end())},
                         {"warnings", synth.state.warnings}};

  if (!config.output.empty()) {
    clock.run("write", [&] {
      write_csv(synth.dataset, config.output);
      write_text(with_suffix(config.output, config.distances, ".distances.csv"), out.distances_csv);
    });
  }
  json stages = json::array();
  for (const auto& t : clock.times()) stages.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  report["stages"] = stages;
  out.report_json = report.dump(2);
  if (!config.output.empty()) write_text(with_suffix(config.output, config.report, ".report.json"), out.report_json);
  out.dataset = std::move(synth.dataset);
  return out;
}

FidelityReport run_eval(const RunConfig& config) {
  tracesyn::validate(config.sketch);
  if (config.synthetic.empty()) throw config_error("no synthetic dataset given");
  Schema schema = load_schema(config.schema);
  TraceDataset raw = load_csv(config.input, schema);
  TraceDataset syn = load_csv(config.synthetic, schema);
  EvalOptions options;
  options.metrics = config.metrics;
  options.sketch = config.sketch;
  options.seed = config.seed;
  options.epsilon = config.epsilon;
  FidelityReport report = evaluate(raw, syn, options);
  if (!config.report.empty()) {
    write_text(config.report, report.to_json());
    std::string csv = config.report;
    auto dot = csv.rfind('.');
    csv = (dot == std::string::npos || csv.find('/', dot) != std::string::npos ? csv : csv.substr(0, dot)) + ".csv";
    write_text(csv, report.to_csv());
  }
  return report;
}

std::string inspect_marginals(const RunConfig& config) {
  config.validate();
  StageClock clock;
  BudgetLedger ledger(eps_delta_to_rho(config.epsilon, config.delta));
  Published p = publish_marginals(config, ledger, clock);
  json out;
  out["budget"] = budget_json(p.budget);
  out["ledger"] = ledger_json(ledger);
  out["published_sets"] = p.merged;
  json tables = json::array();
  for (const auto& m : p.targets) tables.push_back(json::parse(marginal_summary_json(m, true)));
  out["marginals"] = tables;
  out["post_process"] = {{"target_total", p.post.target_total}, {"warnings", p.post.warnings}};
  return out.dump(2);
}

}  // namespace tracesyn
