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

// Publication of selected marginals and the post-processing that makes the
// noisy tables valid, mutually consistent, and protocol-compliant. Nothing
// after publish() touches raw data or spends budget.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "binning.hpp"
#include "privacy.hpp"
#include "table.hpp"

namespace tracesyn {

/// Adds Gaussian noise to each table under its share of rho3. When a ledger
/// is given, rho3 is charged once as the "publish" stage.
std::vector<Marginal> publish(std::vector<Marginal> exact, double rho3, std::uint64_t seed,
                              MarginalSplit split = MarginalSplit::kCellsTwoThirds,
                              BudgetLedger* ledger = nullptr);

/// Norm-sub on raw cells: finds t with sum(max(0, c - t)) == target and
/// applies it. Returns t. Empty or non-finite input falls back to uniform
/// and reports it through `uniform_fallback`.
double norm_sub(std::span<double> cells, double target, bool* uniform_fallback = nullptr);

/// Projects a noisy table to non-negative cells summing to target_total.
Marginal project_valid(const Marginal& m, double target_total, bool* uniform_fallback = nullptr);

/// Inverse-variance weighted mean of the noisy totals of all tables.
double consensus_total(const std::vector<Marginal>& marginals);

/// Replaces every shared attribute's implied 1-way distribution by the
/// inverse-variance weighted average over the tables containing it, then
/// rescales each table onto that consensus. Iterates until all shared
/// projections agree (or max_rounds).
void consistency_shared(std::vector<Marginal>& marginals, int max_rounds = 100,
                        double tolerance = 1e-10);

enum class RuleKind { kOrdering, kPortProtocol };

struct ProtocolRule {
  RuleKind kind = RuleKind::kOrdering;
  /// Ordering: {greater, lesser}, e.g. {"byt", "pkt"}.
  /// Port-protocol: {port attribute, protocol attribute}.
  std::vector<std::string> attributes;
  std::vector<std::int64_t> ports;  // port-protocol only
  std::string protocol;             // the protocol those ports should use
  double tau = 0.1;
};

std::vector<ProtocolRule> parse_rules_json(std::string_view json_text);
std::vector<ProtocolRule> load_rules(const std::string& path);
std::string rules_to_json(const std::vector<ProtocolRule>& rules);

/// byt >= pkt and FTP (ports 20, 21) over TCP, for whichever of those
/// attributes the schema has.
std::vector<ProtocolRule> default_rules(const Schema& schema);

/// Edits consistent tables so they obey the rules. Mass is moved, never
/// created or destroyed, and no cell becomes negative. Rules whose
/// attributes no table holds are skipped with a warning.
void apply_protocol_rules(std::vector<Marginal>& marginals, const std::vector<ProtocolRule>& rules,
                          const BinMapping& mapping, std::vector<std::string>* warnings = nullptr);

/// Share of port-rule mass that is not on the rule's protocol, per table
/// holding both attributes.
struct RuleShare {
  std::vector<std::string> table;
  double port_mass = 0.0;
  double non_protocol_share = 0.0;
};

std::vector<RuleShare> port_protocol_shares(const std::vector<Marginal>& marginals,
                                            const std::vector<ProtocolRule>& rules, const BinMapping& mapping);

struct PostProcessReport {
  double target_total = 0.0;
  std::size_t uniform_fallbacks = 0;
  std::vector<std::string> warnings;
  std::vector<RuleShare> shares;
};

/// project_valid -> consistency_shared -> apply_protocol_rules -> project_valid.
PostProcessReport post_process(std::vector<Marginal>& marginals,
                               const std::vector<ProtocolRule>& rules, const BinMapping& mapping);

}  // namespace tracesyn
