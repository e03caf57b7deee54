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

#include "selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "error.hpp"
#include "json.hpp"
#include "marginal.hpp"

namespace tracesyn {

std::vector<MarginalCandidate> build_candidates(const EncodedDataset& encoded) {
  std::vector<MarginalCandidate> out;
  const std::size_t d = encoded.attributes.size();
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      MarginalCandidate c;
      c.pair = {encoded.attributes[a], encoded.attributes[b]};
      c.cells = static_cast<double>(encoded.domain_sizes[a]) *
                static_cast<double>(encoded.domain_sizes[b]);
      c.phi = dependency_error(encoded, a, b);
      c.noisy_phi = c.phi;
      out.push_back(std::move(c));
    }
  }
  return out;
}

void perturb_dependency(std::vector<MarginalCandidate>& candidates, double rho2, Rng& rng) {
  if (!(rho2 > 0.0)) throw invalid_argument("perturb_dependency: rho2 must be positive");
  if (candidates.empty()) return;
  double rho_each = rho2 / static_cast<double>(candidates.size());
  double sigma = gaussian_sigma(rho_each, kDependencySensitivity);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& c : candidates) c.noisy_phi = c.phi + noise(rng.engine());
}

double selection_objective(const std::vector<MarginalCandidate>& candidates,
                           const std::vector<bool>& selected, double rho3, MarginalSplit split) {
  std::vector<double> cells;
  double objective = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (selected[i]) {
      cells.push_back(candidates[i].cells);
    } else {
      objective += candidates[i].noisy_phi;
    }
  }
  if (cells.empty()) return objective;
  std::vector<double> rhos = per_marginal_rho(rho3, cells, split);
  for (std::size_t k = 0; k < cells.size(); ++k) objective += noise_error(cells[k], rhos[k]);
  return objective;
}

SelectionResult greedy_select(std::vector<MarginalCandidate> candidates, double rho3,
                              MarginalSplit split) {
  if (!(rho3 > 0.0)) throw invalid_argument("select_marginals: rho3 must be positive");
  SelectionResult result;
  std::vector<bool> selected(candidates.size(), false);
  double current = selection_objective(candidates, selected, rho3, split);
  while (result.order.size() < candidates.size()) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (selected[i]) continue;
      selected[i] = true;
      double value = selection_objective(candidates, selected, rho3, split);
      selected[i] = false;
      if (value < best) {
        best = value;
        best_index = i;
      }
    }
    if (best_index == candidates.size() || !(best < current)) break;
    selected[best_index] = true;
    result.order.push_back(best_index);
    current = best;
  }

  std::vector<double> cells;
  for (auto i : result.order) cells.push_back(candidates[i].cells);
  if (!cells.empty()) {
    // Report budgets in candidate order of selection.
    std::vector<double> rhos = per_marginal_rho(rho3, cells, split);
    for (std::size_t k = 0; k < result.order.size(); ++k) {
      auto& c = candidates[result.order[k]];
      c.selected = true;
      c.rho = rhos[k];
      c.psi = noise_error(c.cells, c.rho);
    }
  }
  result.objective = current;
  result.candidates = std::move(candidates);
  return result;
}

SelectionResult select_marginals(std::vector<MarginalCandidate> candidates, double rho2,
                                 double rho3, Rng& rng, MarginalSplit split) {
  if (!(rho2 > 0.0) || !(rho3 > 0.0)) {
    throw invalid_argument("select_marginals: rho budgets must be positive");
  }
  perturb_dependency(candidates, rho2, rng);
  return greedy_select(std::move(candidates), rho3, split);
}

std::vector<std::vector<std::string>> merge_small_marginals(
    const std::vector<std::vector<std::string>>& selected,
    const std::vector<std::string>& attribute_order,
    const std::vector<std::uint32_t>& domain_sizes, std::uint64_t size_threshold) {
  auto rank = [&](const std::string& a) {
    auto it = std::find(attribute_order.begin(), attribute_order.end(), a);
    if (it == attribute_order.end()) throw invalid_argument("merge: unknown attribute '" + a + "'");
    return static_cast<std::size_t>(it - attribute_order.begin());
  };
  using Set = std::set<std::size_t>;
  std::vector<Set> sets;
  for (const auto& s : selected) {
    Set ids;
    for (const auto& a : s) ids.insert(rank(a));
    sets.push_back(std::move(ids));
  }
  auto product = [&](const Set& s) {
    std::uint64_t p = 1;
    for (auto i : s) {
      if (p > UINT64_MAX / std::max<std::uint32_t>(1, domain_sizes[i])) return UINT64_MAX;
      p *= domain_sizes[i];
    }
    return p;
  };
  auto drop_contained = [&] {
    std::vector<Set> kept;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      bool contained = false;
      for (std::size_t j = 0; j < sets.size() && !contained; ++j) {
        if (i == j) continue;
        bool subset = std::includes(sets[j].begin(), sets[j].end(), sets[i].begin(), sets[i].end());
        // Equal sets: keep the first occurrence only.
        if (subset && (sets[i] != sets[j] || j < i)) contained = true;
      }
      if (!contained) kept.push_back(sets[i]);
    }
    sets = std::move(kept);
  };

  drop_contained();
  while (true) {
    std::uint64_t best = UINT64_MAX;
    std::size_t bi = 0;
    std::size_t bj = 0;
    bool found = false;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      for (std::size_t j = i + 1; j < sets.size(); ++j) {
        bool share = false;
        for (auto a : sets[i]) share = share || sets[j].count(a);
        if (!share) continue;
        Set u = sets[i];
        u.insert(sets[j].begin(), sets[j].end());
        std::uint64_t p = product(u);
        if (p <= size_threshold && (!found || p < best)) {
          best = p;
          bi = i;
          bj = j;
          found = true;
        }
      }
    }
    if (!found) break;
    sets[bi].insert(sets[bj].begin(), sets[bj].end());
    sets.erase(sets.begin() + static_cast<std::ptrdiff_t>(bj));
    drop_contained();
  }

  std::vector<std::vector<std::string>> out;
  for (const auto& s : sets) {
    std::vector<std::string> names;
    for (auto i : s) names.push_back(attribute_order[i]);
    out.push_back(std::move(names));
  }
  return out;
}

std::string selection_to_json(const SelectionResult& result) {
  nlohmann::json doc;
  doc["objective"] = result.objective;
  nlohmann::json items = nlohmann::json::array();
  for (const auto& c : result.candidates) {
    items.push_back({{"pair", c.pair},
                     {"cells", c.cells},
                     {"noisy_phi", c.noisy_phi},
                     {"psi", c.psi},
                     {"rho", c.rho},
                     {"selected", c.selected}});
  }
  doc["candidates"] = std::move(items);
  doc["order"] = result.order;
  return doc.dump();
}

}  // namespace tracesyn
