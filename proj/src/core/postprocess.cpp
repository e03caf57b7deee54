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

#include "postprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "error.hpp"
#include "json.hpp"

namespace tracesyn {
namespace {

// Protocol names compare without regard to case ("TCP" and "tcp").
bool same_protocol(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

// Calls fn(base) for every flat index whose coordinate at `pos` is 0; the
// slice along `pos` is then base + k * stride for k in [0, shape[pos]).
void for_each_slice(const Marginal& m, std::size_t pos,
                    const std::function<void(std::size_t)>& fn) {
  const std::size_t stride = m.stride(pos);
  const std::size_t block = stride * m.shape[pos];
  for (std::size_t outer = 0; outer < m.cells.size(); outer += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) fn(outer + inner);
  }
}

std::optional<std::uint32_t> protocol_bin(const BinSpec& spec, const std::string& protocol) {
  for (std::uint32_t q = 0; q < spec.size(); ++q) {
    const auto& labels = spec.bins()[q].labels;
    if (labels.size() == 1 && same_protocol(labels.front(), protocol)) return q;
  }
  return std::nullopt;
}

bool rule_port(const Bin& bin, const ProtocolRule& rule) {
  return std::any_of(rule.ports.begin(), rule.ports.end(), [&](std::int64_t p) { return bin.is_value(p); });
}

std::vector<double> project_one(const Marginal& m, std::size_t pos) {
  std::vector<double> out(m.shape[pos], 0.0);
  const std::size_t stride = m.stride(pos);
  for (std::size_t flat = 0; flat < m.cells.size(); ++flat) {
    out[(flat / stride) % m.shape[pos]] += m.cells[flat];
  }
  return out;
}

double table_variance(const Marginal& m) {
  return m.noise_variance * static_cast<double>(m.cells.size());
}

}  // namespace

std::vector<Marginal> publish(std::vector<Marginal> exact, double rho3, std::uint64_t seed,
                              MarginalSplit split, BudgetLedger* ledger) {
  if (!(rho3 > 0.0)) throw invalid_argument("publish: rho3 must be positive");
  if (exact.empty()) return exact;
  if (ledger) ledger->consume("publish", rho3);
  std::vector<double> cells;
  for (const auto& m : exact) cells.push_back(static_cast<double>(std::max<std::size_t>(1, m.num_cells())));
  std::vector<double> rhos = std::isinf(rho3) ? std::vector<double>(exact.size(), rho3)
                                              : per_marginal_rho(rho3, cells, split);
  for (std::size_t i = 0; i < exact.size(); ++i) {
    auto& m = exact[i];
    std::string stream = "publish";
    for (const auto& a : m.attributes) stream += "/" + a;
    Rng rng(seed, stream);
    m.cells = gaussian_mechanism(m.cells, rhos[i], rng);
    m.rho = rhos[i];
    m.noise_variance = std::isinf(rhos[i]) ? 0.0 : 1.0 / (2.0 * rhos[i]);
    m.total = m.cell_sum();
    m.state = MarginalState::kNoisy;
  }
  return exact;
}

double norm_sub(std::span<double> cells, double target, bool* uniform_fallback) {
  if (uniform_fallback) *uniform_fallback = false;
  if (!(target > 0.0)) throw invalid_argument("project_valid: target total must be positive");
  bool finite = !cells.empty();
  for (double c : cells) finite = finite && std::isfinite(c);
  if (!finite) {
    if (uniform_fallback) *uniform_fallback = true;
    for (double& c : cells) c = target / static_cast<double>(cells.size());
    return 0.0;
  }
  std::vector<double> sorted(cells.begin(), cells.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // sum(max(0, c - t)) is piecewise linear and decreasing in t; with the top
  // k cells positive, t = (S_k - target) / k, valid when it sits between the
  // k-th and (k+1)-th largest values.
  double prefix = 0.0;
  double t = 0.0;
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    prefix += sorted[k - 1];
    t = (prefix - target) / static_cast<double>(k);
    if (t < sorted[k - 1] && (k == sorted.size() || t >= sorted[k])) break;
  }
  double sum = 0.0;
  for (double& c : cells) {
    c = std::max(0.0, c - t);
    sum += c;
  }
  if (sum > 0.0 && sum != target) {
    for (double& c : cells) c *= target / sum;
  }
  return t;
}

Marginal project_valid(const Marginal& m, double target_total, bool* uniform_fallback) {
  Marginal out = m;
  norm_sub(out.cells, target_total, uniform_fallback);
  out.total = target_total;
  out.state = MarginalState::kConsistent;
  return out;
}

double consensus_total(const std::vector<Marginal>& marginals) {
  if (marginals.empty()) throw invalid_argument("consensus_total: no tables");
  double exact_sum = 0.0;
  std::size_t exact_count = 0;
  double num = 0.0;
  double den = 0.0;
  for (const auto& m : marginals) {
    double var = table_variance(m);
    if (var <= 0.0) {
      exact_sum += m.cell_sum();
      ++exact_count;
      continue;
    }
    num += m.cell_sum() / var;
    den += 1.0 / var;
  }
  if (exact_count > 0) return exact_sum / static_cast<double>(exact_count);
  return num / den;
}

void consistency_shared(std::vector<Marginal>& marginals, int max_rounds, double tolerance) {
  std::map<std::string, std::vector<std::size_t>> holders;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < marginals.size(); ++i) {
    for (const auto& a : marginals[i].attributes) {
      auto& h = holders[a];
      if (h.empty()) order.push_back(a);
      h.push_back(i);
    }
  }
  std::erase_if(order, [&](const std::string& a) { return holders[a].size() < 2; });
  if (order.empty()) return;

  auto disagreement = [&] {
    double worst = 0.0;
    for (const auto& a : order) {
      const auto& hs = holders[a];
      auto ref = project_one(marginals[hs[0]], marginals[hs[0]].position(a));
      double scale = std::max(1.0, std::accumulate(ref.begin(), ref.end(), 0.0));
      for (std::size_t k = 1; k < hs.size(); ++k) {
        auto p = project_one(marginals[hs[k]], marginals[hs[k]].position(a));
        for (std::size_t v = 0; v < p.size(); ++v) worst = std::max(worst, std::abs(p[v] - ref[v]) / scale);
      }
    }
    return worst;
  };

  for (int round = 0; round < max_rounds; ++round) {
    for (const auto& a : order) {
      const auto& hs = holders[a];
      const std::uint32_t dim = marginals[hs[0]].shape[marginals[hs[0]].position(a)];
      std::vector<std::vector<double>> projections;
      std::vector<double> variances;
      for (auto i : hs) {
        const auto& m = marginals[i];
        projections.push_back(project_one(m, m.position(a)));
        variances.push_back(m.noise_variance * static_cast<double>(m.cells.size()) / dim);
      }
      std::vector<double> weights(hs.size());
      bool any_exact = std::any_of(variances.begin(), variances.end(), [](double v) { return v <= 0.0; });
      for (std::size_t k = 0; k < hs.size(); ++k) {
        weights[k] = any_exact ? (variances[k] <= 0.0 ? 1.0 : 0.0) : 1.0 / variances[k];
      }
      double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
      std::vector<double> consensus(dim, 0.0);
      for (std::size_t k = 0; k < hs.size(); ++k) {
        for (std::uint32_t v = 0; v < dim; ++v) consensus[v] += weights[k] / wsum * projections[k][v];
      }
      for (std::size_t k = 0; k < hs.size(); ++k) {
        auto& m = marginals[hs[k]];
        const std::size_t pos = m.position(a);
        const std::size_t stride = m.stride(pos);
        const std::size_t slice_len = m.cells.size() / dim;
        for (std::size_t flat = 0; flat < m.cells.size(); ++flat) {
          std::uint32_t v = static_cast<std::uint32_t>((flat / stride) % dim);
          double have = projections[k][v];
          if (have > 0.0) {
            m.cells[flat] *= consensus[v] / have;
          } else {
            m.cells[flat] = consensus[v] / static_cast<double>(slice_len);
          }
        }
      }
    }
    if (disagreement() <= tolerance) break;
  }
  for (auto& m : marginals) m.total = m.cell_sum();
}

std::vector<ProtocolRule> parse_rules_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("rules JSON: ") + e.what());
  }
  if (!doc.is_array()) throw config_error("rules JSON must be a list");
  std::vector<ProtocolRule> rules;
  try {
    for (const auto& item : doc) {
      ProtocolRule r;
      std::string kind = item.at("kind").get<std::string>();
      if (kind == "ordering") {
        r.kind = RuleKind::kOrdering;
      } else if (kind == "port-protocol") {
        r.kind = RuleKind::kPortProtocol;
      } else {
        throw config_error("unknown rule kind '" + kind + "'");
      }
      r.attributes = item.at("attributes").get<std::vector<std::string>>();
      if (r.attributes.size() != 2) throw config_error("a rule names exactly two attributes");
      if (item.contains("tau")) r.tau = item.at("tau").get<double>();
      if (!(r.tau >= 0.0 && r.tau <= 1.0)) throw config_error("rule tau must lie in [0, 1]");
      if (r.kind == RuleKind::kPortProtocol) {
        const auto& params = item.at("params");
        r.ports = params.at("ports").get<std::vector<std::int64_t>>();
        r.protocol = params.at("protocol").get<std::string>();
      }
      rules.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("rules JSON: ") + e.what());
  }
  return rules;
}

std::vector<ProtocolRule> load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open rules file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rules_json(buf.str());
}

std::string rules_to_json(const std::vector<ProtocolRule>& rules) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : rules) {
    nlohmann::json item = {{"kind", r.kind == RuleKind::kOrdering ? "ordering" : "port-protocol"},
                           {"attributes", r.attributes},
                           {"tau", r.tau}};
    if (r.kind == RuleKind::kPortProtocol) {
      item["params"] = {{"ports", r.ports}, {"protocol", r.protocol}};
    }
    doc.push_back(std::move(item));
  }
  return doc.dump();
}

std::vector<ProtocolRule> default_rules(const Schema& schema) {
  auto has = [&](const std::string& name) {
    return std::any_of(schema.begin(), schema.end(), [&](const FieldSchema& f) { return f.name == name; });
  };
  std::vector<ProtocolRule> rules;
  if (has("byt") && has("pkt")) rules.push_back({RuleKind::kOrdering, {"byt", "pkt"}, {}, {}, 0.1});
  if (has("dstport") && has("proto")) {
    rules.push_back({RuleKind::kPortProtocol, {"dstport", "proto"}, {20, 21}, "TCP", 0.1});
  }
  return rules;
}

void apply_protocol_rules(std::vector<Marginal>& marginals, const std::vector<ProtocolRule>& rules,
                          const BinMapping& mapping, std::vector<std::string>* warnings) {
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };
  for (const auto& rule : rules) {
    const std::string& first = rule.attributes.at(0);
    const std::string& second = rule.attributes.at(1);
    bool applied = false;
    for (auto& m : marginals) {
      if (!m.contains(first) || !m.contains(second)) continue;
      applied = true;
      const double before = m.cell_sum();

      if (rule.kind == RuleKind::kOrdering) {
        // first >= second. A cell is impossible when every value of its
        // `first` bin is below every value of its `second` bin.
        const auto& gspec = mapping.spec(first);
        const auto& lspec = mapping.spec(second);
        const std::size_t gp = m.position(first);
        const std::size_t lp = m.position(second);
        const std::size_t gstride = m.stride(gp);
        const std::size_t lstride = m.stride(lp);
        for_each_slice(m, gp, [&](std::size_t base) {
          std::uint32_t lbin = static_cast<std::uint32_t>((base / lstride) % m.shape[lp]);
          double lesser_lo = lspec.bins()[lbin].lower();
          double moved = 0.0;
          double valid_mass = 0.0;
          std::size_t valid_cells = 0;
          for (std::uint32_t g = 0; g < m.shape[gp]; ++g) {
            double& cell = m.cells[base + g * gstride];
            if (gspec.bins()[g].upper() < lesser_lo) {
              moved += cell;
              cell = 0.0;
            } else {
              valid_mass += cell;
              ++valid_cells;
            }
          }
          if (moved <= 0.0) return;
          if (valid_cells == 0) {
            // Nowhere valid to go: put the mass back on the largest bin.
            m.cells[base + (m.shape[gp] - 1) * gstride] += moved;
            return;
          }
          for (std::uint32_t g = 0; g < m.shape[gp]; ++g) {
            if (gspec.bins()[g].upper() < lesser_lo) continue;
            double& cell = m.cells[base + g * gstride];
            cell += valid_mass > 0.0 ? moved * cell / valid_mass
                                     : moved / static_cast<double>(valid_cells);
          }
        });
      } else {
        const auto& pspec = mapping.spec(first);
        const auto& qspec = mapping.spec(second);
        const std::size_t pp = m.position(first);
        const std::size_t qp = m.position(second);
        const std::size_t pstride = m.stride(pp);
        const std::size_t qstride = m.stride(qp);
        std::optional<std::uint32_t> tcp = protocol_bin(qspec, rule.protocol);
        if (!tcp) {
          warn("rule " + first + "/" + second + ": protocol '" + rule.protocol +
               "' has no bin of its own; skipped");
          continue;
        }
        for_each_slice(m, qp, [&](std::size_t base) {
          std::uint32_t pbin = static_cast<std::uint32_t>((base / pstride) % m.shape[pp]);
          if (!rule_port(pspec.bins()[pbin], rule)) return;
          double row = 0.0;
          for (std::uint32_t q = 0; q < m.shape[qp]; ++q) row += m.cells[base + q * qstride];
          double& tcp_cell = m.cells[base + *tcp * qstride];
          double other = row - tcp_cell;
          double cap = rule.tau * row;
          if (row <= 0.0 || other <= cap) return;
          double scale = cap / other;
          for (std::uint32_t q = 0; q < m.shape[qp]; ++q) {
            if (q != *tcp) m.cells[base + q * qstride] *= scale;
          }
          tcp_cell = row - cap;
        });
      }
      // Keep the total bit-stable against accumulated rounding.
      double after = m.cell_sum();
      if (after > 0.0 && after != before) {
        for (double& c : m.cells) c *= before / after;
      }
    }
    if (!applied) {
      warn("rule " + first + "/" + second + ": no published table holds both attributes; skipped");
    }
  }
}

std::vector<RuleShare> port_protocol_shares(const std::vector<Marginal>& marginals,
                                            const std::vector<ProtocolRule>& rules, const BinMapping& mapping) {
  std::vector<RuleShare> out;
  for (const auto& rule : rules) {
    if (rule.kind != RuleKind::kPortProtocol) continue;
    const std::string& port_attr = rule.attributes.at(0);
    const std::string& proto_attr = rule.attributes.at(1);
    if (!mapping.find(port_attr) || !mapping.find(proto_attr)) continue;
    const auto& pspec = mapping.spec(port_attr);
    auto proto = protocol_bin(mapping.spec(proto_attr), rule.protocol);
    if (!proto) continue;
    for (const auto& m : marginals) {
      if (!m.contains(port_attr) || !m.contains(proto_attr)) continue;
      const std::size_t pp = m.position(port_attr);
      const std::size_t qp = m.position(proto_attr);
      RuleShare share{m.attributes, 0.0, 0.0};
      double other = 0.0;
      for (std::size_t flat = 0; flat < m.cells.size(); ++flat) {
        auto idx = m.unflatten(flat);
        if (!rule_port(pspec.bins()[idx[pp]], rule)) continue;
        share.port_mass += m.cells[flat];
        if (idx[qp] != *proto) other += m.cells[flat];
      }
      share.non_protocol_share = share.port_mass > 0.0 ? other / share.port_mass : 0.0;
      out.push_back(std::move(share));
    }
  }
  return out;
}

PostProcessReport post_process(std::vector<Marginal>& marginals,
                               const std::vector<ProtocolRule>& rules, const BinMapping& mapping) {
  PostProcessReport report;
  if (marginals.empty()) return report;
  report.target_total = consensus_total(marginals);
  if (!(report.target_total > 0.0)) {
    report.warnings.push_back("consensus total was not positive; using 1");
    report.target_total = 1.0;
  }
  for (auto& m : marginals) {
    bool fallback = false;
    m = project_valid(m, report.target_total, &fallback);
    if (fallback) ++report.uniform_fallbacks;
  }
  consistency_shared(marginals);
  apply_protocol_rules(marginals, rules, mapping, &report.warnings);
  for (auto& m : marginals) {
    bool fallback = false;
    m = project_valid(m, report.target_total, &fallback);
    if (fallback) ++report.uniform_fallbacks;
  }
  report.shares = port_protocol_shares(marginals, rules, mapping);
  return report;
}

}  // namespace tracesyn
