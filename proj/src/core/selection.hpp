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

// Data-driven choice of which 2-way marginals to publish, and merging of
// small overlapping choices into combined marginals.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "binning.hpp"
#include "privacy.hpp"
#include "rng.hpp"

namespace tracesyn {

struct MarginalCandidate {
  std::vector<std::string> pair;
  double cells = 1.0;      // product of the two domain sizes
  double phi = 0.0;        // exact dependency error; never leaves the process
  double noisy_phi = 0.0;  // phi + Gaussian noise under the selection budget
  double psi = 0.0;        // noise error under the final split (selected only)
  double rho = 0.0;        // publication budget share (selected only)
  bool selected = false;
};

/// One candidate per attribute pair, d(d-1)/2 in total, with exact phi.
std::vector<MarginalCandidate> build_candidates(const EncodedDataset& encoded);

/// Sensitivity of one dependency error under a record change.
inline constexpr double kDependencySensitivity = 4.0;

/// Perturbs every phi under rho2. The m perturbations compose, so each one
/// gets rho2 / m.
void perturb_dependency(std::vector<MarginalCandidate>& candidates, double rho2, Rng& rng);

/// Sum over selected of psi (rho3 re-split over the selected set) plus sum
/// over unselected of noisy phi.
double selection_objective(const std::vector<MarginalCandidate>& candidates,
                           const std::vector<bool>& selected, double rho3,
                           MarginalSplit split = MarginalSplit::kCellsTwoThirds);

struct SelectionResult {
  std::vector<MarginalCandidate> candidates;  // flags, psi and rho filled in
  std::vector<std::size_t> order;             // indices in the order they were picked
  double objective = 0.0;
};

/// Greedy minimisation of the selection objective on noisy phi: each round
/// adds the candidate whose inclusion lowers the objective most, stopping
/// when no addition lowers it.
SelectionResult greedy_select(std::vector<MarginalCandidate> candidates, double rho3,
                              MarginalSplit split = MarginalSplit::kCellsTwoThirds);

/// perturb_dependency followed by greedy_select.
SelectionResult select_marginals(std::vector<MarginalCandidate> candidates, double rho2,
                                 double rho3, Rng& rng,
                                 MarginalSplit split = MarginalSplit::kCellsTwoThirds);

/// Greedily unions selected attribute sets that share an attribute while the
/// union's domain product stays <= size_threshold (smallest union first).
/// Sets contained in another set are dropped. Attribute order inside a set
/// follows `attribute_order`.
std::vector<std::vector<std::string>> merge_small_marginals(
    const std::vector<std::vector<std::string>>& selected,
    const std::vector<std::string>& attribute_order,
    const std::vector<std::uint32_t>& domain_sizes, std::uint64_t size_threshold = 10000);

std::string selection_to_json(const SelectionResult& result);

}  // namespace tracesyn
