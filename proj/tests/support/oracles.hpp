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

// Reference computations written independently of the library, used as
// expected values in tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

namespace tracesyn::testing {

// Closed form of rho + 2 sqrt(rho L) = eps: sqrt(rho) = sqrt(L + eps) - sqrt(L).
inline double rho_closed_form(double eps, double delta) {
  double l = std::log(1.0 / delta);
  double r = std::sqrt(l + eps) - std::sqrt(l);
  return r * r;
}

// Bisection on s = sqrt(rho) in [0, sqrt(eps)].
inline double rho_bisection(double eps, double delta) {
  double l = std::log(1.0 / delta);
  double lo = 0.0;
  double hi = std::sqrt(eps);
  for (int i = 0; i < 400; ++i) {
    double s = 0.5 * (lo + hi);
    (s * s + 2.0 * s * std::sqrt(l) < eps ? lo : hi) = s;
  }
  double s = 0.5 * (lo + hi);
  return s * s;
}

// Norm-sub by bisection on the shift t.
inline std::vector<double> norm_sub_oracle(const std::vector<double>& cells, double target) {
  auto mass = [&](double t) {
    double m = 0.0;
    for (double c : cells) m += std::max(0.0, c - t);
    return m;
  };
  double lo = *std::min_element(cells.begin(), cells.end()) - target - 1.0;
  double hi = *std::max_element(cells.begin(), cells.end());
  for (int i = 0; i < 300; ++i) {
    double mid = 0.5 * (lo + hi);
    (mass(mid) > target ? lo : hi) = mid;
  }
  std::vector<double> out;
  for (double c : cells) out.push_back(std::max(0.0, c - 0.5 * (lo + hi)));
  return out;
}

// |m2 - ma mb / n| summed over a dense rows x cols table.
inline double phi_oracle(const std::vector<std::vector<double>>& table) {
  std::size_t rows = table.size();
  std::size_t cols = table[0].size();
  std::vector<double> ra(rows, 0.0);
  std::vector<double> cb(cols, 0.0);
  double n = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      ra[i] += table[i][j];
      cb[j] += table[i][j];
      n += table[i][j];
    }
  }
  double phi = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) phi += std::abs(table[i][j] - ra[i] * cb[j] / n);
  }
  return phi;
}

// Base-2 JSD from the textbook definition via Shannon entropies.
inline double jsd_oracle(std::vector<double> p, std::vector<double> q) {
  auto normalise = [](std::vector<double>& v) {
    double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& x : v) x /= s;
  };
  normalise(p);
  normalise(q);
  auto entropy = [](const std::vector<double>& v) {
    double h = 0.0;
    for (double x : v) {
      if (x > 0) h -= x * std::log(x);
    }
    return h / std::log(2.0);
  };
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return entropy(m) - 0.5 * entropy(p) - 0.5 * entropy(q);
}

// W1 through the quantile functions: integral over u of |P^-1(u) - Q^-1(u)|.
inline double emd_quantile_oracle(std::vector<std::pair<double, double>> p,
                                  std::vector<std::pair<double, double>> q) {
  auto prep = [](std::vector<std::pair<double, double>>& v) {
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (auto& e : v) s += e.second;
    for (auto& e : v) e.second /= s;
  };
  prep(p);
  prep(q);
  std::size_t i = 0;
  std::size_t j = 0;
  double left_p = p[0].second;
  double left_q = q[0].second;
  double total = 0.0;
  while (i < p.size() && j < q.size()) {
    double step = std::min(left_p, left_q);
    total += step * std::abs(p[i].first - q[j].first);
    left_p -= step;
    left_q -= step;
    if (left_p <= 1e-15 && ++i < p.size()) left_p = p[i].second;
    if (left_q <= 1e-15 && ++j < q.size()) left_q = q[j].second;
  }
  return total;
}

// Spearman by counting: rank = 1 + #less + (#equal - 1) / 2.
inline double spearman_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0;
      double equal = 0;
      for (double x : v) {
        less += x < v[i];
        equal += x == v[i];
      }
      r[i] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
  };
  auto ra = ranks(a);
  auto rb = ranks(b);
  double n = static_cast<double>(a.size());
  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double num = 0;
  double da = 0;
  double db = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

// Objective for a subset: psi of the chosen (budget re-split by cells^(2/3))
// plus phi of the rest.
inline double objective_oracle(const std::vector<double>& phi, const std::vector<double>& cells,
                               std::uint32_t mask, double rho3) {
  double weight = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (mask >> i & 1u) weight += std::pow(cells[i], 2.0 / 3.0);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (mask >> i & 1u) {
      double rho_i = rho3 * std::pow(cells[i], 2.0 / 3.0) / weight;
      total += cells[i] * std::sqrt(1.0 / (2.0 * rho_i)) * std::sqrt(2.0 / M_PI);
    } else {
      total += phi[i];
    }
  }
  return total;
}

inline std::pair<std::uint32_t, double> exhaustive_selection(const std::vector<double>& phi,
                                                            const std::vector<double>& cells, double rho3) {
  std::uint32_t best = 0;
  double best_value = objective_oracle(phi, cells, 0, rho3);
  for (std::uint32_t mask = 1; mask < (1u << phi.size()); ++mask) {
    double v = objective_oracle(phi, cells, mask, rho3);
    if (v < best_value) {
      best_value = v;
      best = mask;
    }
  }
  return {best, best_value};
}

}  // namespace tracesyn::testing
