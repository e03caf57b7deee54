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

// Exact contingency tables and the two error terms of marginal selection.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "binning.hpp"
#include "table.hpp"

namespace tracesyn {

/// Exact counts over `attributes`; total is the record count.
Marginal compute_marginal(const EncodedDataset& encoded, const std::vector<std::string>& attributes);

/// Sums `m` down onto `attributes` (a subset of its own, in the order given).
Marginal project(const Marginal& m, const std::vector<std::string>& attributes);

/// L1 distance between a 2-way table and the product of its 1-way
/// projections, in counts: sum |m2(a,b) - ma(a) * mb(b) / n|.
double dependency_error(const Marginal& m2, const Marginal& m_a, const Marginal& m_b);

/// Same quantity straight from encoded columns without materialising the
/// (possibly huge) dense 2-way table. Zero cells are accounted for in closed
/// form, so cost is O(n log n) regardless of domain sizes.
double dependency_error(const EncodedDataset& encoded, std::size_t a, std::size_t b);

/// Expected L1 mass of the Gaussian noise on a published table:
/// cells * sqrt(1 / (2 rho)) * sqrt(2 / pi).
double noise_error(double cells, double rho);

/// L1 distance between the two tables after normalising each to unit mass.
double normalized_l1(std::span<const double> a, std::span<const double> b);

std::string marginal_summary_json(const Marginal& m, bool include_cells);

}  // namespace tracesyn
