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

// zCDP budget conversion, stage allocation, the budget ledger, and the
// Gaussian mechanism.

#pragma once

#include <array>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "rng.hpp"

namespace tracesyn {

/// Smallest rho such that rho-zCDP implies (epsilon, delta)-DP, i.e. the root
/// of epsilon = rho + 2 * sqrt(rho * ln(1/delta)). Solved by bisection.
double eps_delta_to_rho(double epsilon, double delta);

/// The epsilon implied by rho-zCDP at the given delta.
double rho_to_epsilon(double rho, double delta);

struct BudgetFractions {
  double binning = 0.1;
  double selection = 0.1;
  double publish = 0.8;
};

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  double rho_total = 0.0;
  double rho_binning = 0.0;
  double rho_selection = 0.0;
  double rho_publish = 0.0;
};

/// Splits `rho` by `fractions`. The publish stage takes the remainder so the
/// three stage budgets add back to `rho` exactly in floating point.
PrivacyBudget allocate_budget(double rho, const BudgetFractions& fractions = {});

enum class MarginalSplit { kCellsTwoThirds, kEqual };

/// Splits a stage budget over marginals, weight cells^(2/3) (or equal). The
/// shares sum to `rho_stage` exactly when added left to right.
std::vector<double> per_marginal_rho(double rho_stage, std::span<const double> cell_counts,
                                     MarginalSplit split = MarginalSplit::kCellsTwoThirds);

/// Records privacy spend per stage. Consumption is serialised; the running
/// sum can never exceed the total, and nothing is accepted once sealed.
class BudgetLedger {
 public:
  struct Entry {
    std::string stage;
    double rho = 0.0;
  };

  explicit BudgetLedger(double rho_total);

  BudgetLedger(const BudgetLedger&) = delete;
  BudgetLedger& operator=(const BudgetLedger&) = delete;

  void consume(const std::string& stage, double rho);
  void seal();

  double total() const noexcept { return rho_total_; }
  double consumed() const;
  double remaining() const;
  bool sealed() const;
  std::vector<Entry> entries() const;

 private:
  mutable std::mutex mu_;
  double rho_total_;
  double consumed_ = 0.0;
  bool sealed_ = false;
  std::vector<Entry> entries_;
};

/// Standard deviation of the Gaussian noise for unit sensitivity under rho.
double gaussian_sigma(double rho, double sensitivity = 1.0);

/// Adds independent N(0, sensitivity^2 / (2 rho)) noise to every cell. Pure
/// given the generator state; budget is charged by the caller's stage.
std::vector<double> gaussian_mechanism(std::span<const double> counts, double rho, Rng& rng,
                                       double sensitivity = 1.0);

/// Same, but charges `rho` to `ledger` under `stage` first.
std::vector<double> gaussian_mechanism(std::span<const double> counts, double rho, Rng& rng,
                                       BudgetLedger& ledger, const std::string& stage);

}  // namespace tracesyn
