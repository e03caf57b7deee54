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

#include "privacy.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "error.hpp"

namespace tracesyn {
namespace {

// Nudges `last` one ulp at a time until prefix + last == target.
double exact_remainder(double prefix, double target) {
  double last = target - prefix;
  for (int guard = 0; guard < 64 && prefix + last != target; ++guard) {
    last = prefix + last < target ? std::nextafter(last, INFINITY)
                                  : std::nextafter(last, -INFINITY);
  }
  return last;
}

// Makes the left-to-right sum of `parts` equal `target` by fixing the last
// part. A rounding tie can make that impossible for a given prefix, in which
// case the prefix moves by an ulp and the fix is retried.
void close_sum(std::vector<double>& parts, double target) {
  if (parts.size() == 1) {
    parts[0] = target;
    return;
  }
  for (int attempt = 0; attempt < 32; ++attempt) {
    double prefix = 0.0;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) prefix += parts[i];
    parts.back() = exact_remainder(prefix, target);
    if (prefix + parts.back() == target) return;
    // Shift the prefix itself by one of its ulps.
    double step = std::nextafter(prefix, INFINITY) - prefix;
    double& nudge = parts[parts.size() - 2];
    nudge = nudge >= step ? nudge - step : nudge + step;
  }
}

}  // namespace

double rho_to_epsilon(double rho, double delta) {
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

double eps_delta_to_rho(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw invalid_argument("epsilon must be positive and finite");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw invalid_argument("delta must lie in (0, 1)");
  // epsilon(rho) >= rho, so the root lies in [0, epsilon].
  double lo = 0.0;
  double hi = epsilon;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (rho_to_epsilon(mid, delta) < epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

PrivacyBudget allocate_budget(double rho, const BudgetFractions& fractions) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw invalid_argument("rho must be non-negative");
  if (fractions.binning < 0 || fractions.selection < 0 || fractions.publish < 0) {
    throw budget_error("budget fractions must be non-negative");
  }
  double sum = fractions.binning + fractions.selection + fractions.publish;
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "budget fractions must sum to 1 (got " << sum << ")";
    throw budget_error(msg.str());
  }
  PrivacyBudget b;
  b.rho_total = rho;
  b.rho_binning = fractions.binning * rho;
  b.rho_selection = fractions.selection * rho;
  std::vector<double> parts = {b.rho_binning, b.rho_selection, 0.0};
  close_sum(parts, rho);
  b.rho_selection = std::max(0.0, parts[1]);
  b.rho_publish = std::max(0.0, parts[2]);
  return b;
}

std::vector<double> per_marginal_rho(double rho_stage, std::span<const double> cell_counts,
                                     MarginalSplit split) {
  if (cell_counts.empty()) throw invalid_argument("per_marginal_rho: no marginals");
  if (!(rho_stage > 0.0)) throw invalid_argument("per_marginal_rho: stage budget must be positive");
  std::vector<double> weights(cell_counts.size());
  for (std::size_t i = 0; i < cell_counts.size(); ++i) {
    if (!(cell_counts[i] >= 1.0)) throw invalid_argument("per_marginal_rho: cell count < 1");
    weights[i] = split == MarginalSplit::kEqual ? 1.0 : std::cbrt(cell_counts[i] * cell_counts[i]);
  }
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> out(weights.size());
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) out[i] = rho_stage * (weights[i] / total);
  close_sum(out, rho_stage);
  return out;
}

BudgetLedger::BudgetLedger(double rho_total) : rho_total_(rho_total) {
  if (!(rho_total >= 0.0)) throw invalid_argument("ledger total must be non-negative");
}

void BudgetLedger::consume(const std::string& stage, double rho) {
  std::lock_guard lock(mu_);
  if (sealed_) throw budget_error("ledger is sealed; stage '" + stage + "' cannot spend");
  if (!(rho >= 0.0)) throw budget_error("stage '" + stage + "' requested a negative spend");
  double next = consumed_ + rho;
  if (next > rho_total_) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "stage '" << stage << "' would spend rho " << rho << " with only "
        << (rho_total_ - consumed_) << " remaining";
    throw budget_error(msg.str());
  }
  consumed_ = next;
  entries_.push_back({stage, rho});
}

void BudgetLedger::seal() {
  std::lock_guard lock(mu_);
  sealed_ = true;
}

double BudgetLedger::consumed() const {
  std::lock_guard lock(mu_);
  return consumed_;
}

double BudgetLedger::remaining() const {
  std::lock_guard lock(mu_);
  return rho_total_ - consumed_;
}

bool BudgetLedger::sealed() const {
  std::lock_guard lock(mu_);
  return sealed_;
}

std::vector<BudgetLedger::Entry> BudgetLedger::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

double gaussian_sigma(double rho, double sensitivity) {
  if (!(rho > 0.0)) throw invalid_argument("Gaussian mechanism needs rho > 0");
  return sensitivity * std::sqrt(1.0 / (2.0 * rho));
}

std::vector<double> gaussian_mechanism(std::span<const double> counts, double rho, Rng& rng,
                                       double sensitivity) {
  std::vector<double> out(counts.begin(), counts.end());
  if (std::isinf(rho)) return out;
  double sigma = gaussian_sigma(rho, sensitivity);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& cell : out) cell += noise(rng.engine());
  return out;
}

std::vector<double> gaussian_mechanism(std::span<const double> counts, double rho, Rng& rng,
                                       BudgetLedger& ledger, const std::string& stage) {
  if (!(rho > 0.0)) throw invalid_argument("Gaussian mechanism needs rho > 0");
  ledger.consume(stage, rho);
  return gaussian_mechanism(counts, rho, rng);
}

}  // namespace tracesyn
