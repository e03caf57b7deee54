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

#include "binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "error.hpp"
#include "json.hpp"

namespace tracesyn {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t kind_cap(FieldKind kind) {
  switch (kind) {
    case FieldKind::kPort: return kMaxPortValue;
    case FieldKind::kIp: return kMaxIpValue;
    default: return std::numeric_limits<std::int64_t>::max();
  }
}

bool is_ordered_kind(FieldKind kind) {
  return kind == FieldKind::kInteger || kind == FieldKind::kFloat ||
         kind == FieldKind::kTimestamp;
}

std::vector<IntRange> normalize_atoms(std::vector<IntRange> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const IntRange& a, const IntRange& b) { return a.lo < b.lo; });
  std::vector<IntRange> out;
  for (const auto& a : atoms) {
    if (!out.empty() && a.lo <= out.back().hi + 1) {
      out.back().hi = std::max(out.back().hi, a.hi);
    } else {
      out.push_back(a);
    }
  }
  return out;
}

// Union of several bins of one attribute.
Bin merge_bins(const std::vector<const Bin*>& parts, BinShape shape) {
  Bin out;
  out.shape = shape;
  out.lo = std::numeric_limits<double>::infinity();
  out.hi = -std::numeric_limits<double>::infinity();
  for (const Bin* b : parts) {
    out.atoms.insert(out.atoms.end(), b->atoms.begin(), b->atoms.end());
    out.labels.insert(out.labels.end(), b->labels.begin(), b->labels.end());
    out.lo = std::min(out.lo, b->lo);
    out.hi = std::max(out.hi, b->hi);
  }
  out.atoms = normalize_atoms(std::move(out.atoms));
  std::sort(out.labels.begin(), out.labels.end());
  if (out.atoms.empty() && out.labels.empty()) return out;
  out.lo = out.atoms.empty() ? out.lo : 0.0;
  out.hi = out.atoms.empty() ? out.hi : 0.0;
  return out;
}

std::vector<double> tally(const BinSpec& spec, const TraceDataset& dataset, std::size_t column) {
  std::vector<double> counts(spec.size(), 0.0);
  for (std::size_t r = 0; r < dataset.records.size(); ++r) {
    auto bin = spec.find(dataset.records[r].values[column]);
    if (!bin) {
      throw data_error("row " + std::to_string(r + 1) + ", column " + spec.attribute() +
                       ": value outside every bin");
    }
    counts[*bin] += 1.0;
  }
  return counts;
}

// Folds IP singletons with noisy count below `threshold` into their /30
// prefix. The prefix bin holds every address of the /30 except the ones that
// stay singletons, so unseen neighbours still have exactly one bin.
std::pair<BinSpec, std::vector<std::vector<std::uint32_t>>> fold_low_count_ips(
    const BinSpec& spec, const std::vector<double>& noisy, double threshold) {
  std::set<std::int64_t> kept;
  std::map<std::int64_t, std::vector<std::uint32_t>> low_by_prefix;
  for (std::uint32_t b = 0; b < spec.size(); ++b) {
    const Bin& bin = spec.bins()[b];
    if (bin.shape == BinShape::kSingleton && noisy[b] < threshold) {
      low_by_prefix[ip_prefix_bin(static_cast<std::uint32_t>(bin.atoms.front().lo))].push_back(b);
    } else {
      for (const auto& a : bin.atoms) {
        for (std::int64_t v = a.lo; v <= a.hi && a.size() <= 4; ++v) kept.insert(v);
      }
    }
  }
  std::vector<Bin> bins;
  std::vector<std::vector<std::uint32_t>> groups;
  std::set<std::uint32_t> folded;
  for (auto& [prefix, members] : low_by_prefix) {
    for (auto m : members) folded.insert(m);
  }
  for (std::uint32_t b = 0; b < spec.size(); ++b) {
    if (folded.count(b)) continue;
    bins.push_back(spec.bins()[b]);
    groups.push_back({b});
  }
  for (auto& [prefix, members] : low_by_prefix) {
    Bin bin;
    bin.shape = BinShape::kPrefix;
    for (std::int64_t v = prefix; v < prefix + 4; ++v) {
      if (!kept.count(v)) bin.atoms.push_back({v, v});
    }
    bin.atoms = normalize_atoms(std::move(bin.atoms));
    bins.push_back(std::move(bin));
    groups.push_back(members);
  }
  // Keep integer-valued specs sorted by their first atom.
  std::vector<std::size_t> order(bins.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bins[a].atoms.front().lo < bins[b].atoms.front().lo;
  });
  std::vector<Bin> sorted_bins;
  std::vector<std::vector<std::uint32_t>> sorted_groups;
  for (auto i : order) {
    sorted_bins.push_back(std::move(bins[i]));
    sorted_groups.push_back(std::move(groups[i]));
  }
  return {BinSpec(spec.attribute(), spec.kind(), spec.ordered(), std::move(sorted_bins)),
          std::move(sorted_groups)};
}

}  // namespace

std::string_view to_string(BinShape shape) noexcept {
  switch (shape) {
    case BinShape::kSingleton: return "singleton";
    case BinShape::kRange: return "range";
    case BinShape::kPrefix: return "prefix30";
    case BinShape::kLog: return "log";
    case BinShape::kOther: return "other";
  }
  return "unknown";
}

std::uint64_t Bin::cardinality() const noexcept {
  if (!labels.empty()) return labels.size();
  std::uint64_t n = 0;
  for (const auto& a : atoms) n += a.size();
  return n;
}

double Bin::lower() const {
  if (!labels.empty()) throw invalid_argument("categorical bin has no numeric bounds");
  if (!atoms.empty()) return static_cast<double>(atoms.front().lo);
  return lo;
}

double Bin::upper() const {
  if (!labels.empty()) throw invalid_argument("categorical bin has no numeric bounds");
  if (!atoms.empty()) return static_cast<double>(atoms.back().hi);
  return hi;
}

bool Bin::is_value(std::int64_t v) const noexcept {
  return atoms.size() == 1 && atoms.front().lo == v && atoms.front().hi == v;
}

bool Bin::is_label(const std::string& v) const noexcept {
  return labels.size() == 1 && labels.front() == v;
}

BinSpec::BinSpec(std::string attribute, FieldKind kind, bool ordered, std::vector<Bin> bins)
    : attribute_(std::move(attribute)), kind_(kind), ordered_(ordered), bins_(std::move(bins)) {
  build_index();
}

void BinSpec::build_index() {
  int_index_.clear();
  label_index_.clear();
  float_upper_.clear();
  for (std::uint32_t b = 0; b < bins_.size(); ++b) {
    const Bin& bin = bins_[b];
    for (const auto& a : bin.atoms) int_index_.push_back({a.lo, a.hi, b});
    for (const auto& l : bin.labels) {
      if (!label_index_.emplace(l, b).second) {
        throw invalid_argument("bins of " + attribute_ + " overlap on '" + l + "'");
      }
    }
    if (kind_ == FieldKind::kFloat) float_upper_.push_back(bin.hi);
  }
  std::sort(int_index_.begin(), int_index_.end(),
            [](const Slot& a, const Slot& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < int_index_.size(); ++i) {
    if (int_index_[i].lo <= int_index_[i - 1].hi) {
      throw invalid_argument("bins of " + attribute_ + " overlap");
    }
  }
}

std::optional<std::uint32_t> BinSpec::find(const Value& value) const {
  if (kind_ == FieldKind::kCategorical) {
    const auto* s = std::get_if<std::string>(&value);
    if (!s) return std::nullopt;
    auto it = label_index_.find(*s);
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
  }
  if (kind_ == FieldKind::kFloat) {
    double v = numeric_value(value);
    if (bins_.empty() || v < bins_.front().lo || v > bins_.back().hi) return std::nullopt;
    auto it = std::upper_bound(float_upper_.begin(), float_upper_.end(), v);
    if (it == float_upper_.end()) return static_cast<std::uint32_t>(bins_.size() - 1);
    return static_cast<std::uint32_t>(it - float_upper_.begin());
  }
  const auto* iv = std::get_if<std::int64_t>(&value);
  if (!iv) return std::nullopt;
  std::int64_t v = *iv;
  auto it = std::upper_bound(int_index_.begin(), int_index_.end(), v,
                             [](std::int64_t x, const Slot& s) { return x < s.lo; });
  if (it == int_index_.begin()) return std::nullopt;
  --it;
  if (v > it->hi) return std::nullopt;
  return it->bin;
}

std::optional<std::size_t> BinMapping::find(const std::string& attribute) const noexcept {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].attribute() == attribute) return i;
  }
  return std::nullopt;
}

const BinSpec& BinMapping::spec(const std::string& attribute) const {
  if (auto i = find(attribute)) return specs[*i];
  throw data_error("no bins for attribute '" + attribute + "'");
}

std::vector<std::uint32_t> BinMapping::domain_sizes() const {
  std::vector<std::uint32_t> out;
  for (const auto& s : specs) out.push_back(static_cast<std::uint32_t>(s.size()));
  return out;
}

IntRange port_range(std::int64_t port, std::int64_t threshold, std::int64_t width) {
  std::int64_t lo = std::max(threshold, floor_div(port, width) * width);
  std::int64_t hi = std::min(kMaxPortValue, floor_div(port, width) * width + width - 1);
  return {lo, hi};
}

std::vector<IntRange> log_integer_ranges(std::int64_t max_value, std::size_t bins) {
  if (max_value <= 0 || bins == 0) return {{0, std::max<std::int64_t>(max_value, 0)}};
  double top = std::log1p(static_cast<double>(max_value));
  std::vector<std::int64_t> starts;
  starts.push_back(0);
  for (std::size_t k = 1; k < bins; ++k) {
    double edge = std::expm1(top * static_cast<double>(k) / static_cast<double>(bins));
    auto start = static_cast<std::int64_t>(std::ceil(edge));
    if (start > starts.back() && start <= max_value) starts.push_back(start);
  }
  std::vector<IntRange> out;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    std::int64_t hi = i + 1 < starts.size() ? starts[i + 1] - 1 : max_value;
    out.push_back({starts[i], hi});
  }
  return out;
}

std::optional<std::string> timestamp_attribute(const Schema& schema) {
  for (const auto& f : schema) {
    if (f.kind == FieldKind::kTimestamp) return f.name;
  }
  return std::nullopt;
}

BinMapping type_dependent_bins(const TraceDataset& dataset, const BinningConfig& config) {
  if (dataset.empty()) throw data_error("cannot bin an empty dataset");
  BinMapping mapping;
  for (std::size_t c = 0; c < dataset.schema.size(); ++c) {
    const auto& field = dataset.schema[c];
    std::vector<Bin> bins;
    switch (field.kind) {
      case FieldKind::kIp: {
        std::set<std::int64_t> seen;
        for (const auto& r : dataset.records) seen.insert(std::get<std::int64_t>(r.values[c]));
        for (auto v : seen) bins.push_back(Bin::singleton(v));
        break;
      }
      case FieldKind::kPort: {
        std::set<std::int64_t> low;
        std::set<std::int64_t> range_starts;
        for (const auto& r : dataset.records) {
          auto v = std::get<std::int64_t>(r.values[c]);
          if (v < config.port_threshold) {
            low.insert(v);
          } else {
            range_starts.insert(port_range(v, config.port_threshold, config.port_width).lo);
          }
        }
        for (auto v : low) bins.push_back(Bin::singleton(v));
        for (auto s : range_starts) {
          auto r = port_range(s, config.port_threshold, config.port_width);
          bins.push_back(Bin::range(r.lo, r.hi));
        }
        break;
      }
      case FieldKind::kCategorical: {
        // Small domains are left un-binned; larger ones also start as
        // singletons and rely on the frequency-dependent merge.
        std::set<std::string> seen;
        for (const auto& r : dataset.records) seen.insert(std::get<std::string>(r.values[c]));
        for (const auto& v : seen) bins.push_back(Bin::label(v));
        break;
      }
      case FieldKind::kInteger: {
        std::int64_t max_value = 0;
        for (const auto& r : dataset.records) {
          max_value = std::max(max_value, std::get<std::int64_t>(r.values[c]));
        }
        for (const auto& r : log_integer_ranges(max_value, config.log_bins)) {
          Bin b{r.lo == r.hi ? BinShape::kSingleton : BinShape::kLog, {r}, {}, 0, 0};
          bins.push_back(std::move(b));
        }
        break;
      }
      case FieldKind::kFloat: {
        double max_value = 0.0;
        for (const auto& r : dataset.records) {
          max_value = std::max(max_value, std::get<double>(r.values[c]));
        }
        if (max_value <= 0.0) {
          bins.push_back({BinShape::kLog, {}, {}, 0.0, 0.0});
          break;
        }
        double top = std::log1p(max_value);
        double prev = 0.0;
        for (std::size_t k = 1; k <= config.log_bins; ++k) {
          double edge = k == config.log_bins
                            ? max_value
                            : std::expm1(top * static_cast<double>(k) /
                                         static_cast<double>(config.log_bins));
          if (edge <= prev) continue;
          bins.push_back({BinShape::kLog, {}, {}, prev, edge});
          prev = edge;
        }
        break;
      }
      case FieldKind::kTimestamp: {
        std::int64_t tmin = std::numeric_limits<std::int64_t>::max();
        std::int64_t tmax = std::numeric_limits<std::int64_t>::min();
        for (const auto& r : dataset.records) {
          auto v = std::get<std::int64_t>(r.values[c]);
          tmin = std::min(tmin, v);
          tmax = std::max(tmax, v);
        }
        std::int64_t width = std::max<std::int64_t>(1, config.ts_window_ms);
        while (static_cast<std::size_t>(floor_div(tmax, width) - floor_div(tmin, width) + 1) >
               std::max<std::size_t>(1, config.max_ts_windows)) {
          width *= 2;
        }
        for (std::int64_t k = floor_div(tmin, width); k <= floor_div(tmax, width); ++k) {
          bins.push_back(Bin::range(k * width, k * width + width - 1));
        }
        break;
      }
    }
    mapping.specs.emplace_back(field.name, field.kind, is_ordered_kind(field.kind),
                               std::move(bins));
  }
  return mapping;
}

TraceDataset add_tsdiff(const TraceDataset& dataset, const std::vector<std::string>& group_key) {
  auto ts_name = timestamp_attribute(dataset.schema);
  if (!ts_name) throw data_error("add_tsdiff: dataset has no timestamp attribute");
  if (dataset.find(kTsdiffAttribute)) throw data_error("dataset already has a tsdiff attribute");
  std::size_t ts_col = dataset.index_of(*ts_name);
  std::vector<std::size_t> key_cols;
  for (const auto& k : group_key) key_cols.push_back(dataset.index_of(k));

  const auto& recs = dataset.records;
  std::vector<std::size_t> order(recs.size());
  std::iota(order.begin(), order.end(), 0);
  auto same_group = [&](std::size_t a, std::size_t b) {
    for (auto c : key_cols) {
      if (recs[a].values[c] != recs[b].values[c]) return false;
    }
    return true;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (auto c : key_cols) {
      if (recs[a].values[c] != recs[b].values[c]) return recs[a].values[c] < recs[b].values[c];
    }
    return std::get<std::int64_t>(recs[a].values[ts_col]) <
           std::get<std::int64_t>(recs[b].values[ts_col]);
  });

  std::vector<std::int64_t> diff(recs.size(), 0);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (same_group(order[i - 1], order[i])) {
      diff[order[i]] = std::get<std::int64_t>(recs[order[i]].values[ts_col]) -
                       std::get<std::int64_t>(recs[order[i - 1]].values[ts_col]);
    }
  }

  TraceDataset out = dataset;
  out.schema.push_back({kTsdiffAttribute, FieldKind::kInteger, FieldRole::kFeature});
  for (std::size_t r = 0; r < out.records.size(); ++r) {
    out.records[r].values.emplace_back(diff[r]);
  }
  return out;
}

std::pair<BinSpec, std::vector<std::vector<std::uint32_t>>> merge_low_frequency(
    const BinSpec& spec, const std::vector<double>& noisy, double threshold) {
  const auto& bins = spec.bins();
  std::vector<std::vector<std::uint32_t>> groups;
  if (spec.ordered()) {
    // Runs of consecutive low bins are pooled until the pool reaches the
    // threshold; a high bin always stands alone.
    std::vector<std::uint32_t> pending;
    double pending_sum = 0.0;
    for (std::uint32_t b = 0; b < bins.size(); ++b) {
      if (noisy[b] >= threshold) {
        if (!pending.empty()) groups.push_back(std::exchange(pending, {}));
        pending_sum = 0.0;
        groups.push_back({b});
        continue;
      }
      pending.push_back(b);
      pending_sum += noisy[b];
      if (pending_sum >= threshold) {
        groups.push_back(std::exchange(pending, {}));
        pending_sum = 0.0;
      }
    }
    if (!pending.empty()) groups.push_back(std::move(pending));
  } else {
    std::vector<std::uint32_t> low;
    for (std::uint32_t b = 0; b < bins.size(); ++b) {
      if (noisy[b] < threshold) low.push_back(b);
    }
    for (std::uint32_t b = 0; b < bins.size(); ++b) {
      if (low.size() < 2 || noisy[b] >= threshold) groups.push_back({b});
    }
    if (low.size() >= 2) groups.push_back(low);
  }

  std::vector<Bin> merged;
  for (const auto& g : groups) {
    if (g.size() == 1) {
      merged.push_back(bins[g.front()]);
      continue;
    }
    std::vector<const Bin*> parts;
    for (auto b : g) parts.push_back(&bins[b]);
    BinShape shape = spec.ordered() ? (spec.kind() == FieldKind::kFloat ? BinShape::kLog
                                                                         : BinShape::kRange)
                                    : BinShape::kOther;
    merged.push_back(merge_bins(parts, shape));
  }
  return {BinSpec(spec.attribute(), spec.kind(), spec.ordered(), std::move(merged)),
          std::move(groups)};
}

FrequencyMergeResult frequency_dependent_merge(const BinMapping& mapping,
                                               const TraceDataset& dataset, double rho1,
                                               std::uint64_t seed, const BinningConfig& config,
                                               BudgetLedger* ledger) {
  if (!(rho1 > 0.0)) throw invalid_argument("frequency_dependent_merge: rho1 must be positive");
  if (mapping.specs.empty()) throw invalid_argument("frequency_dependent_merge: empty mapping");
  if (ledger) ledger->consume("binning", rho1);

  std::vector<double> cells;
  for (const auto& s : mapping.specs) cells.push_back(static_cast<double>(std::max<std::size_t>(1, s.size())));
  std::vector<double> rhos = per_marginal_rho(rho1, cells, config.split);

  FrequencyMergeResult result;
  for (std::size_t a = 0; a < mapping.specs.size(); ++a) {
    const BinSpec& spec = mapping.specs[a];
    std::size_t column = dataset.index_of(spec.attribute());
    std::vector<double> exact = tally(spec, dataset, column);
    Rng rng(seed, "binning/" + spec.attribute());
    std::vector<double> noisy = gaussian_mechanism(exact, rhos[a], rng);
    double sigma = gaussian_sigma(rhos[a]);

    BinSpec current = spec;
    std::vector<std::vector<std::uint32_t>> origin(spec.size());
    for (std::uint32_t b = 0; b < spec.size(); ++b) origin[b] = {b};
    auto compose = [&](std::pair<BinSpec, std::vector<std::vector<std::uint32_t>>> step) {
      std::vector<std::vector<std::uint32_t>> next;
      std::vector<double> next_noisy;
      for (const auto& g : step.second) {
        std::vector<std::uint32_t> members;
        double sum = 0.0;
        for (auto b : g) {
          members.insert(members.end(), origin[b].begin(), origin[b].end());
          sum += noisy[b];
        }
        next.push_back(std::move(members));
        next_noisy.push_back(sum);
      }
      current = std::move(step.first);
      origin = std::move(next);
      noisy = std::move(next_noisy);
    };

    if (spec.kind() == FieldKind::kIp) {
      compose(fold_low_count_ips(current, noisy, config.ip_threshold_sigmas * sigma));
    }
    double threshold = config.freq_threshold.value_or(config.freq_threshold_sigmas * sigma);
    compose(merge_low_frequency(current, noisy, threshold));

    Marginal m;
    m.attributes = {spec.attribute()};
    m.shape = {static_cast<std::uint32_t>(current.size())};
    m.cells = noisy;
    m.total = m.cell_sum();
    m.state = MarginalState::kNoisy;
    m.rho = rhos[a];
    m.noise_variance = sigma * sigma;
    result.one_way.push_back(std::move(m));
    result.thresholds.push_back(threshold);
    result.mapping.specs.push_back(std::move(current));
  }
  return result;
}

std::optional<std::size_t> EncodedDataset::find(const std::string& attribute) const noexcept {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i] == attribute) return i;
  }
  return std::nullopt;
}

std::size_t EncodedDataset::index_of(const std::string& attribute) const {
  if (auto i = find(attribute)) return *i;
  throw data_error("encoded dataset has no attribute '" + attribute + "'");
}

EncodedDataset encode(const TraceDataset& dataset, const BinMapping& mapping,
                      const std::vector<std::string>& group_key) {
  EncodedDataset out;
  out.group_key = group_key;
  for (const auto& spec : mapping.specs) {
    std::size_t column = dataset.index_of(spec.attribute());
    std::vector<std::uint32_t> encoded(dataset.size());
    for (std::size_t r = 0; r < dataset.size(); ++r) {
      auto bin = spec.find(dataset.records[r].values[column]);
      if (!bin) {
        throw data_error("row " + std::to_string(r + 1) + ", column " + spec.attribute() +
                         ": value '" +
                         format_value(spec.kind(), dataset.records[r].values[column]) +
                         "' lies outside every bin");
      }
      encoded[r] = *bin;
    }
    out.attributes.push_back(spec.attribute());
    out.columns.push_back(std::move(encoded));
    out.domain_sizes.push_back(static_cast<std::uint32_t>(spec.size()));
  }
  return out;
}

Value decode_value(const Bin& bin, FieldKind kind, Rng& rng) {
  if (kind == FieldKind::kCategorical) {
    if (bin.labels.empty()) throw invalid_argument("decode_value: empty categorical bin");
    auto i = rng.uniform_int(0, static_cast<std::int64_t>(bin.labels.size()) - 1);
    return bin.labels[static_cast<std::size_t>(i)];
  }
  if (kind == FieldKind::kFloat) {
    if (!(bin.hi > bin.lo)) return bin.lo;
    return rng.uniform(bin.lo, bin.hi);
  }
  if (bin.atoms.empty()) throw invalid_argument("decode_value: empty bin");
  const std::int64_t cap = kind_cap(kind);
  std::uint64_t total = 0;
  for (const auto& a : bin.atoms) {
    if (a.lo <= cap) total += static_cast<std::uint64_t>(std::min(a.hi, cap) - a.lo) + 1;
  }
  if (total == 0) return std::min(bin.atoms.front().lo, cap);
  std::uint64_t pick = std::uniform_int_distribution<std::uint64_t>(0, total - 1)(rng.engine());
  for (const auto& a : bin.atoms) {
    if (a.lo > cap) break;
    std::uint64_t span = static_cast<std::uint64_t>(std::min(a.hi, cap) - a.lo) + 1;
    if (pick < span) return a.lo + static_cast<std::int64_t>(pick);
    pick -= span;
  }
  return bin.atoms.front().lo;
}

std::string mapping_to_json(const BinMapping& mapping) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& spec : mapping.specs) {
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& b : spec.bins()) {
      nlohmann::json jb = {{"shape", to_string(b.shape)}};
      if (!b.labels.empty()) {
        jb["labels"] = b.labels;
      } else if (!b.atoms.empty()) {
        nlohmann::json atoms = nlohmann::json::array();
        for (const auto& a : b.atoms) atoms.push_back({a.lo, a.hi});
        jb["atoms"] = std::move(atoms);
      } else {
        jb["lo"] = b.lo;
        jb["hi"] = b.hi;
      }
      bins.push_back(std::move(jb));
    }
    doc.push_back({{"attribute", spec.attribute()},
                   {"kind", to_string(spec.kind())},
                   {"ordered", spec.ordered()},
                   {"bins", std::move(bins)}});
  }
  return doc.dump();
}

}  // namespace tracesyn
