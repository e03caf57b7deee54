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

#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "error.hpp"
#include "marginal.hpp"

namespace tracesyn {
namespace {

// Largest-remainder apportionment of n over non-negative weights.
std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t n) {
  std::vector<double> w(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    w[i] = std::max(0.0, weights[i]);
    total += w[i];
  }
  if (total <= 0.0) {
    std::fill(w.begin(), w.end(), 1.0);
    total = static_cast<double>(w.size());
  }
  std::vector<std::size_t> counts(w.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double exact = static_cast<double>(n) * w[i] / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n && k < remainders.size(); ++k, ++assigned) {
    ++counts[remainders[k].second];
  }
  // Only reachable through floating-point drift; top up the heaviest cell.
  if (assigned < n) counts[static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin())] += n - assigned;
  return counts;
}

std::vector<std::size_t> positions_in(const EncodedDataset& rows, const Marginal& m) {
  std::vector<std::size_t> pos;
  for (const auto& a : m.attributes) pos.push_back(rows.index_of(a));
  return pos;
}

std::vector<std::uint32_t> row_cells(const EncodedDataset& rows, const Marginal& m,
                                     const std::vector<std::size_t>& pos) {
  const std::size_t n = rows.size();
  std::vector<std::uint32_t> cell(n, 0);
  for (std::size_t k = 0; k < pos.size(); ++k) {
    const auto& col = rows.columns[pos[k]];
    const std::uint32_t dim = m.shape[k];
    for (std::size_t r = 0; r < n; ++r) cell[r] = cell[r] * dim + col[r];
  }
  return cell;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> all_distances(const EncodedDataset& rows, const std::vector<Marginal>& targets) {
  std::vector<double> out;
  for (const auto& t : targets) out.push_back(marginal_distance(rows, t));
  return out;
}

// Pearson between attribute `a` and `b` of a table (summing out the rest).
double pearson_pair(const Marginal& m, std::size_t a, std::size_t b) {
  Marginal two = project(m, {m.attributes[a], m.attributes[b]});
  return pearson_from_marginal(two);
}

// Restricts a numeric bin to [lo, hi]; returns the input when that empties it.
Bin clamp_bin(const Bin& bin, double lo, double hi) {
  Bin out = bin;
  if (!bin.atoms.empty()) {
    out.atoms.clear();
    for (const auto& a : bin.atoms) {
      auto l = static_cast<double>(a.lo) >= lo ? a.lo : static_cast<std::int64_t>(std::ceil(lo));
      auto h = static_cast<double>(a.hi) <= hi ? a.hi : static_cast<std::int64_t>(std::floor(hi));
      if (l <= h) out.atoms.push_back({l, h});
    }
    if (out.atoms.empty()) return bin;
    return out;
  }
  out.lo = std::max(bin.lo, lo);
  out.hi = std::min(bin.hi, hi);
  if (out.lo > out.hi) return bin;
  return out;
}

}  // namespace

void validate(const SynthConfig& config) {
  if (config.max_iterations < 1) throw config_error("max_iterations must be >= 1");
  if (!(config.alpha_decay > 0.0 && config.alpha_decay < 1.0)) {
    throw config_error("alpha_decay must lie in (0, 1)");
  }
  if (!(config.alpha0 > 0.0 && config.alpha0 <= 1.0)) throw config_error("alpha0 must lie in (0, 1]");
  if (!(config.convergence_tol >= 0.0)) throw config_error("convergence_tol must be >= 0");
  if (!(config.duplicate_ratio >= 0.0 && config.duplicate_ratio <= 1.0)) {
    throw config_error("duplicate_ratio must lie in [0, 1]");
  }
  if (config.n_init_marginals && *config.n_init_marginals == 0) {
    throw config_error("n_init_marginals must be >= 1");
  }
}

double pearson_from_marginal(const Marginal& m) {
  if (m.arity() != 2) throw invalid_argument("pearson_from_marginal: table must be 2-way");
  double total = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  const std::uint32_t cols = m.shape[1];
  for (std::size_t flat = 0; flat < m.cells.size(); ++flat) {
    double w = std::max(0.0, m.cells[flat]);
    if (w == 0.0) continue;
    double x = static_cast<double>(flat / cols);
    double y = static_cast<double>(flat % cols);
    total += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    syy += w * y * y;
    sxy += w * x * y;
  }
  if (total <= 0.0) return 0.0;
  double mx = sx / total;
  double my = sy / total;
  double vx = sxx / total - mx * mx;
  double vy = syy / total - my * my;
  if (vx <= 1e-12 * std::max(1.0, mx * mx) || vy <= 1e-12 * std::max(1.0, my * my)) return 0.0;
  double r = (sxy / total - mx * my) / std::sqrt(vx * vy);
  return std::clamp(r, -1.0, 1.0);
}

SynthState initialize_dataset(const std::vector<Marginal>& targets,
                              const std::vector<std::string>& attributes,
                              const std::vector<std::uint32_t>& domain_sizes,
                              const SynthConfig& config, std::size_t n_records, Rng& rng) {
  if (n_records == 0) throw invalid_argument("initialize_dataset: n_records must be positive");
  if (attributes.size() != domain_sizes.size()) throw invalid_argument("initialize_dataset: shape mismatch");
  SynthState state;
  EncodedDataset& rows = state.rows;
  rows.attributes = attributes;
  rows.domain_sizes = domain_sizes;
  rows.columns.assign(attributes.size(), std::vector<std::uint32_t>(n_records, 0));
  std::vector<bool> assigned(attributes.size(), false);
  auto& eng = rng.engine();

  if (config.init == InitMode::kUniform) {
    for (std::size_t a = 0; a < attributes.size(); ++a) {
      std::uniform_int_distribution<std::uint32_t> pick(0, domain_sizes[a] - 1);
      for (auto& v : rows.columns[a]) v = pick(eng);
    }
    return state;
  }

  if (config.init == InitMode::kMarginal) {
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const auto& m = targets[i];
      std::size_t key = m.position(config.key_attribute);
      if (m.arity() < 2 || key == Marginal::npos) continue;
      double strength = 0.0;
      for (std::size_t other = 0; other < m.arity(); ++other) {
        if (other != key) strength = std::max(strength, std::abs(pearson_pair(m, key, other)));
      }
      ranked.emplace_back(strength, i);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    if (config.n_init_marginals && ranked.size() > *config.n_init_marginals) {
      ranked.resize(*config.n_init_marginals);
    }
    if (ranked.empty()) {
      state.warnings.push_back("no published table holds key attribute '" + config.key_attribute +
                               "'; initialising every attribute independently");
    }

    for (const auto& [strength, index] : ranked) {
      const Marginal& m = targets[index];
      std::vector<std::size_t> pos = positions_in(rows, m);
      std::vector<std::size_t> shared;
      std::vector<std::size_t> fresh;
      for (std::size_t k = 0; k < pos.size(); ++k) (assigned[pos[k]] ? shared : fresh).push_back(k);
      if (fresh.empty()) continue;
      state.init_marginals.push_back(index);

      // Per table cell: its key over the shared attributes and over the new ones.
      std::size_t shared_cells = 1;
      std::size_t fresh_cells = 1;
      for (auto k : shared) shared_cells *= m.shape[k];
      for (auto k : fresh) fresh_cells *= m.shape[k];
      std::vector<double> conditional(shared_cells * fresh_cells, 0.0);
      std::vector<double> fresh_marginal(fresh_cells, 0.0);
      for (std::size_t flat = 0; flat < m.cells.size(); ++flat) {
        auto idx = m.unflatten(flat);
        std::size_t s = 0;
        std::size_t f = 0;
        for (auto k : shared) s = s * m.shape[k] + idx[k];
        for (auto k : fresh) f = f * m.shape[k] + idx[k];
        double w = std::max(0.0, m.cells[flat]);
        conditional[s * fresh_cells + f] += w;
        fresh_marginal[f] += w;
      }

      // Rows grouped by their shared key (one group when nothing is shared).
      std::vector<std::vector<std::size_t>> groups(shared_cells);
      for (std::size_t r = 0; r < n_records; ++r) {
        std::size_t s = 0;
        for (auto k : shared) s = s * m.shape[k] + rows.columns[pos[k]][r];
        groups[s].push_back(r);
      }
      for (std::size_t s = 0; s < shared_cells; ++s) {
        auto& group = groups[s];
        if (group.empty()) continue;
        std::vector<double> weights(conditional.begin() + static_cast<std::ptrdiff_t>(s * fresh_cells),
                                    conditional.begin() + static_cast<std::ptrdiff_t>((s + 1) * fresh_cells));
        if (std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0) weights = fresh_marginal;
        auto counts = apportion(weights, group.size());
        std::vector<std::size_t> combos;
        combos.reserve(group.size());
        for (std::size_t f = 0; f < counts.size(); ++f) combos.insert(combos.end(), counts[f], f);
        std::shuffle(combos.begin(), combos.end(), eng);
        for (std::size_t i = 0; i < group.size(); ++i) {
          std::size_t f = combos[i];
          for (std::size_t k = fresh.size(); k-- > 0;) {
            rows.columns[pos[fresh[k]]][group[i]] = static_cast<std::uint32_t>(f % m.shape[fresh[k]]);
            f /= m.shape[fresh[k]];
          }
        }
      }
      for (auto k : fresh) assigned[pos[k]] = true;
    }
  }

  for (std::size_t a = 0; a < attributes.size(); ++a) {
    if (assigned[a]) continue;
    const Marginal* one_way = nullptr;
    for (const auto& t : targets) {
      if (t.arity() == 1 && t.attributes[0] == attributes[a]) one_way = &t;
    }
    std::vector<double> weights = one_way ? one_way->cells : std::vector<double>(domain_sizes[a], 1.0);
    auto counts = apportion(weights, n_records);
    std::vector<std::uint32_t> values;
    values.reserve(n_records);
    for (std::size_t b = 0; b < counts.size(); ++b) values.insert(values.end(), counts[b], static_cast<std::uint32_t>(b));
    std::shuffle(values.begin(), values.end(), eng);
    rows.columns[a] = std::move(values);
  }
  return state;
}

double marginal_distance(const EncodedDataset& rows, const Marginal& target) {
  auto pos = positions_in(rows, target);
  auto cells = row_cells(rows, target, pos);
  std::vector<double> counts(target.cells.size(), 0.0);
  for (auto c : cells) counts[c] += 1.0;
  return normalized_l1(counts, target.cells);
}

std::size_t gum_step(EncodedDataset& rows, const Marginal& target, double alpha,
                     double duplicate_ratio, Rng& rng) {
  const std::size_t n = rows.size();
  const double target_sum = target.cell_sum();
  if (n == 0 || target_sum <= 0.0) return 0;
  auto& eng = rng.engine();
  auto pos = positions_in(rows, target);
  auto cell_of = row_cells(rows, target, pos);
  const std::size_t ncells = target.cells.size();

  // Rows bucketed by cell (counting sort).
  std::vector<std::size_t> offset(ncells + 1, 0);
  for (auto c : cell_of) ++offset[c + 1];
  for (std::size_t c = 0; c < ncells; ++c) offset[c + 1] += offset[c];
  std::vector<std::size_t> bucket(n);
  {
    std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
    for (std::size_t r = 0; r < n; ++r) bucket[fill[cell_of[r]]++] = r;
  }

  // Rounded step sizes never exceed twice the gap, so no cell's error grows.
  std::vector<std::size_t> donors;
  std::vector<std::uint32_t> recipients;
  for (std::size_t c = 0; c < ncells; ++c) {
    double have = static_cast<double>(offset[c + 1] - offset[c]);
    double want = std::max(0.0, target.cells[c]) * static_cast<double>(n) / target_sum;
    double gap = have - want;
    auto step = static_cast<std::size_t>(std::floor(alpha * std::abs(gap) + 0.5));
    if (step == 0) continue;
    if (gap > 0) {
      std::size_t size = offset[c + 1] - offset[c];
      step = std::min(step, size);
      // Partial Fisher-Yates inside the bucket picks `step` random rows.
      for (std::size_t i = 0; i < step; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, size - 1);
        std::swap(bucket[offset[c] + i], bucket[offset[c] + pick(eng)]);
        donors.push_back(bucket[offset[c] + i]);
      }
    } else {
      recipients.insert(recipients.end(), step, static_cast<std::uint32_t>(c));
    }
  }
  std::shuffle(donors.begin(), donors.end(), eng);
  std::shuffle(recipients.begin(), recipients.end(), eng);
  std::size_t moves = std::min(donors.size(), recipients.size());
  moves = std::min(moves, static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n))));

  std::vector<std::uint32_t> index(pos.size());
  for (std::size_t k = 0; k < moves; ++k) {
    const std::size_t row = donors[k];
    const std::uint32_t cell = recipients[k];
    const std::size_t have = offset[cell + 1] - offset[cell];
    if (have > 0 && duplicate_ratio > 0.0 && rng.uniform01() < duplicate_ratio) {
      // Duplicate: copy a whole row already in the wanted cell.
      std::uniform_int_distribution<std::size_t> pick(offset[cell], offset[cell + 1] - 1);
      std::size_t source = bucket[pick(eng)];
      for (auto& col : rows.columns) col[row] = col[source];
    } else {
      // Replace: rewrite only this table's attributes.
      std::size_t flat = cell;
      for (std::size_t i = pos.size(); i-- > 0;) {
        index[i] = static_cast<std::uint32_t>(flat % target.shape[i]);
        flat /= target.shape[i];
      }
      for (std::size_t i = 0; i < pos.size(); ++i) rows.columns[pos[i]][row] = index[i];
    }
  }
  return moves;
}

void gum_update(SynthState& state, const std::vector<Marginal>& targets, const SynthConfig& config,
                Rng& rng) {
  validate(config);
  if (state.distances.empty()) state.distances.push_back(all_distances(state.rows, targets));
  double previous = mean(state.distances.back());
  double alpha = config.alpha0;
  for (std::size_t t = 0; t < config.max_iterations; ++t) {
    std::size_t changed = 0;
    for (const auto& target : targets) changed += gum_step(state.rows, target, alpha, config.duplicate_ratio, rng);
    state.distances.push_back(all_distances(state.rows, targets));
    state.rows_changed.push_back(changed);
    ++state.iterations;
    double current = mean(state.distances.back());
    if (config.convergence_tol > 0.0 && previous - current < config.convergence_tol) break;
    previous = current;
    alpha *= config.alpha_decay;
  }
}

std::int64_t sample_increment(const Bin& bin, Rng& rng) {
  auto lo = static_cast<std::int64_t>(bin.lower());
  auto hi = static_cast<std::int64_t>(bin.upper());
  if (hi <= lo) return lo;
  double width = static_cast<double>(hi - lo + 1);
  double mid = 0.5 * (static_cast<double>(lo) + static_cast<double>(hi));
  auto v = static_cast<std::int64_t>(std::llround(rng.normal(mid, width / 4.0)));
  return std::clamp(v, lo, hi);
}

void reconstruct_timestamps(TraceDataset& rows, const EncodedDataset& encoded,
                            const BinMapping& mapping, const std::vector<std::string>& group_key,
                            Rng& rng) {
  auto drop_tsdiff = [&] {
    if (auto c = rows.find(kTsdiffAttribute)) {
      rows.schema.erase(rows.schema.begin() + static_cast<std::ptrdiff_t>(*c));
      for (auto& r : rows.records) r.values.erase(r.values.begin() + static_cast<std::ptrdiff_t>(*c));
    }
  };
  auto ts_name = timestamp_attribute(rows.schema);
  if (!ts_name) {
    drop_tsdiff();
    return;
  }
  const std::size_t ts_col = rows.index_of(*ts_name);
  const BinSpec& window_spec = mapping.spec(*ts_name);
  const auto& windows = encoded.columns[encoded.index_of(*ts_name)];
  const std::vector<std::uint32_t>* diffs = nullptr;
  const BinSpec* diff_spec = nullptr;
  if (auto d = encoded.find(kTsdiffAttribute)) {
    diffs = &encoded.columns[*d];
    diff_spec = &mapping.spec(kTsdiffAttribute);
  }
  std::vector<std::size_t> key_cols;
  for (const auto& k : group_key) key_cols.push_back(rows.index_of(k));

  const auto& recs = rows.records;
  std::vector<std::size_t> order(recs.size());
  std::iota(order.begin(), order.end(), 0);
  auto diff_lo = [&](std::size_t r) { return diffs ? diff_spec->bins()[(*diffs)[r]].lower() : 0.0; };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (auto c : key_cols) {
      if (recs[a].values[c] != recs[b].values[c]) return recs[a].values[c] < recs[b].values[c];
    }
    if (windows[a] != windows[b]) return windows[a] < windows[b];
    return diff_lo(a) < diff_lo(b);
  });

  std::int64_t previous = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::size_t r = order[i];
    bool first = i == 0;
    if (!first) {
      for (auto c : key_cols) first = first || recs[r].values[c] != recs[order[i - 1]].values[c];
    }
    std::int64_t ts;
    if (first || !diffs) {
      ts = std::get<std::int64_t>(decode_value(window_spec.bins()[windows[r]], FieldKind::kTimestamp, rng));
    } else {
      ts = previous + sample_increment(diff_spec->bins()[(*diffs)[r]], rng);
    }
    rows.records[r].values[ts_col] = ts;
    previous = ts;
  }
  drop_tsdiff();
}

SynthesisResult synthesize(const std::vector<Marginal>& targets, const BinMapping& mapping,
                           const Schema& output_schema, const SynthConfig& config,
                           const std::vector<ProtocolRule>& rules,
                           const std::vector<std::string>& group_key, std::uint64_t seed) {
  validate(config);
  if (targets.empty()) throw invalid_argument("synthesize: no published marginals");
  std::size_t n = config.n_records;
  if (n == 0) {
    double total = std::max(1.0, consensus_total(targets));
    n = static_cast<std::size_t>(std::llround(total));
  }
  std::vector<std::string> attributes;
  for (const auto& s : mapping.specs) attributes.push_back(s.attribute());

  SynthesisResult result;
  {
    Rng init_rng(seed, "synth/init");
    result.state = initialize_dataset(targets, attributes, mapping.domain_sizes(), config, n, init_rng);
    Rng gum_rng(seed, "synth/gum");
    gum_update(result.state, targets, config, gum_rng);
  }
  EncodedDataset& rows = result.state.rows;

  // Bin-level repair for ordering rules the tables could not fully enforce:
  // lower the lesser attribute to the highest bin that can still fit.
  struct Ordering {
    std::size_t greater;
    std::size_t lesser;
  };
  std::vector<Ordering> orderings;
  for (const auto& rule : rules) {
    if (rule.kind != RuleKind::kOrdering) continue;
    auto g = rows.find(rule.attributes[0]);
    auto l = rows.find(rule.attributes[1]);
    if (!g || !l) continue;
    const auto& gspec = mapping.specs[*g];
    const auto& lspec = mapping.specs[*l];
    if (!gspec.ordered() || !lspec.ordered()) continue;
    orderings.push_back({*g, *l});
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double g_hi = gspec.bins()[rows.columns[*g][r]].upper();
      std::uint32_t& lb = rows.columns[*l][r];
      if (lspec.bins()[lb].lower() <= g_hi) continue;
      while (lb > 0 && lspec.bins()[lb].lower() > g_hi) --lb;
    }
  }

  TraceDataset out;
  out.schema = output_schema;
  out.provenance = Provenance::kSynthetic;
  out.records.assign(n, TraceRecord{std::vector<Value>(output_schema.size(), Value(std::int64_t{0}))});
  std::vector<bool> decoded(output_schema.size(), false);
  auto decode_column = [&](std::size_t c, const std::function<Bin(std::size_t, const Bin&)>& restrict) {
    const auto& field = output_schema[c];
    if (field.kind == FieldKind::kTimestamp) return;
    std::size_t e = rows.index_of(field.name);
    const auto& spec = mapping.specs[*mapping.find(field.name)];
    Rng rng(seed, "synth/decode/" + field.name);
    for (std::size_t r = 0; r < n; ++r) {
      const Bin& bin = spec.bins()[rows.columns[e][r]];
      out.records[r].values[c] = restrict ? decode_value(restrict(r, bin), field.kind, rng)
                                          : decode_value(bin, field.kind, rng);
    }
    decoded[c] = true;
  };
  auto out_col = [&](std::size_t encoded_index) {
    auto it = std::find_if(output_schema.begin(), output_schema.end(),
                           [&](const FieldSchema& f) { return f.name == rows.attributes[encoded_index]; });
    return static_cast<std::size_t>(it - output_schema.begin());
  };
  // Ordered pairs: lesser first, capped by the greater bin; then greater,
  // floored by the lesser value. Both values stay inside their bins.
  for (const auto& o : orderings) {
    std::size_t gc = out_col(o.greater);
    std::size_t lc = out_col(o.lesser);
    if (gc >= output_schema.size() || lc >= output_schema.size()) continue;
    const auto& gspec = mapping.specs[o.greater];
    if (!decoded[lc]) {
      decode_column(lc, [&](std::size_t r, const Bin& bin) {
        return clamp_bin(bin, -INFINITY, gspec.bins()[rows.columns[o.greater][r]].upper());
      });
    }
    if (!decoded[gc]) {
      decode_column(gc, [&](std::size_t r, const Bin& bin) {
        return clamp_bin(bin, numeric_value(out.records[r].values[lc]), INFINITY);
      });
    }
  }
  for (std::size_t c = 0; c < output_schema.size(); ++c) {
    if (!decoded[c]) decode_column(c, nullptr);
  }

  Rng ts_rng(seed, "synth/ts");
  reconstruct_timestamps(out, rows, mapping, group_key, ts_rng);
  if (auto ts = timestamp_attribute(out.schema)) {
    std::size_t c = out.index_of(*ts);
    std::stable_sort(out.records.begin(), out.records.end(), [&](const TraceRecord& a, const TraceRecord& b) {
      return std::get<std::int64_t>(a.values[c]) < std::get<std::int64_t>(b.values[c]);
    });
  }
  result.dataset = std::move(out);
  return result;
}

}  // namespace tracesyn
