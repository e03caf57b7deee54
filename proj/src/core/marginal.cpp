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

#include "marginal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "error.hpp"
#include "json.hpp"

namespace tracesyn {

Marginal compute_marginal(const EncodedDataset& encoded,
                          const std::vector<std::string>& attributes) {
  if (attributes.empty()) throw invalid_argument("compute_marginal: no attributes");
  Marginal m;
  m.attributes = attributes;
  std::vector<const std::vector<std::uint32_t>*> columns;
  for (const auto& a : attributes) {
    auto idx = encoded.find(a);
    if (!idx) throw data_error("compute_marginal: unknown attribute '" + a + "'");
    m.shape.push_back(encoded.domain_sizes[*idx]);
    columns.push_back(&encoded.columns[*idx]);
  }
  std::uint64_t cells = domain_product(m.shape);
  if (cells > (1ULL << 31)) throw invalid_argument("compute_marginal: table too large");
  m.cells.assign(cells, 0.0);
  const std::size_t n = encoded.size();
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < columns.size(); ++i) flat = flat * m.shape[i] + (*columns[i])[r];
    m.cells[flat] += 1.0;
  }
  m.total = static_cast<double>(n);
  m.state = MarginalState::kExact;
  return m;
}

Marginal project(const Marginal& m, const std::vector<std::string>& attributes) {
  Marginal out;
  out.attributes = attributes;
  std::vector<std::size_t> positions;
  for (const auto& a : attributes) {
    std::size_t p = m.position(a);
    if (p == Marginal::npos) throw invalid_argument("project: attribute '" + a + "' not in table");
    positions.push_back(p);
    out.shape.push_back(m.shape[p]);
  }
  out.cells.assign(domain_product(out.shape), 0.0);
  std::vector<std::uint32_t> index(m.shape.size(), 0);
  for (std::size_t flat = 0; flat < m.cells.size(); ++flat) {
    std::size_t target = 0;
    for (std::size_t i = 0; i < positions.size(); ++i) target = target * out.shape[i] + index[positions[i]];
    out.cells[target] += m.cells[flat];
    for (std::size_t i = index.size(); i-- > 0;) {
      if (++index[i] < m.shape[i]) break;
      index[i] = 0;
    }
  }
  out.total = m.total;
  out.state = m.state;
  out.rho = m.rho;
  out.noise_variance = m.noise_variance * static_cast<double>(m.cells.size()) /
                       static_cast<double>(std::max<std::size_t>(1, out.cells.size()));
  return out;
}

double dependency_error(const Marginal& m2, const Marginal& m_a, const Marginal& m_b) {
  if (m2.arity() != 2 || m_a.arity() != 1 || m_b.arity() != 1) {
    throw invalid_argument("dependency_error: expects one 2-way and two 1-way tables");
  }
  if (m_a.shape[0] != m2.shape[0] || m_b.shape[0] != m2.shape[1]) {
    throw invalid_argument("dependency_error: shapes do not match");
  }
  double n = m2.cell_sum();
  double scale = std::max({1.0, std::abs(n)});
  if (std::abs(m_a.cell_sum() - n) > 1e-9 * scale || std::abs(m_b.cell_sum() - n) > 1e-9 * scale) {
    throw invalid_argument("dependency_error: mismatched totals");
  }
  if (n <= 0.0) return 0.0;
  double phi = 0.0;
  for (std::uint32_t i = 0; i < m2.shape[0]; ++i) {
    for (std::uint32_t j = 0; j < m2.shape[1]; ++j) {
      phi += std::abs(m2.cells[i * m2.shape[1] + j] - m_a.cells[i] * m_b.cells[j] / n);
    }
  }
  return phi;
}

double dependency_error(const EncodedDataset& encoded, std::size_t a, std::size_t b) {
  const auto& ca = encoded.columns.at(a);
  const auto& cb = encoded.columns.at(b);
  const std::size_t n = ca.size();
  if (n == 0) return 0.0;
  std::vector<double> pa(encoded.domain_sizes[a], 0.0);
  std::vector<double> pb(encoded.domain_sizes[b], 0.0);
  std::vector<std::uint64_t> keys(n);
  for (std::size_t r = 0; r < n; ++r) {
    pa[ca[r]] += 1.0;
    pb[cb[r]] += 1.0;
    keys[r] = (static_cast<std::uint64_t>(ca[r]) << 32) | cb[r];
  }
  std::sort(keys.begin(), keys.end());
  const double dn = static_cast<double>(n);
  // Over non-zero cells: |c - e|. Over zero cells: e, whose sum is
  // n - (sum of e over non-zero cells) because all expectations add to n.
  double phi = 0.0;
  double expected_nonzero = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && keys[j] == keys[i]) ++j;
    double count = static_cast<double>(j - i);
    double expected = pa[keys[i] >> 32] * pb[keys[i] & 0xffffffffu] / dn;
    phi += std::abs(count - expected);
    expected_nonzero += expected;
    i = j;
  }
  phi += std::max(0.0, dn - expected_nonzero);
  return phi;
}

double noise_error(double cells, double rho) {
  if (!(cells >= 1.0)) throw invalid_argument("noise_error: cells must be >= 1");
  if (!(rho > 0.0)) throw invalid_argument("noise_error: rho must be positive");
  return cells * std::sqrt(1.0 / (2.0 * rho)) * std::sqrt(2.0 / std::numbers::pi);
}

double normalized_l1(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw invalid_argument("normalized_l1: size mismatch");
  double sa = 0.0;
  double sb = 0.0;
  for (double v : a) sa += v;
  for (double v : b) sb += v;
  if (sa <= 0.0 || sb <= 0.0) return sa == sb ? 0.0 : 2.0;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] / sa - b[i] / sb);
  return d;
}

std::string marginal_summary_json(const Marginal& m, bool include_cells) {
  nlohmann::json doc = {{"attributes", m.attributes},
                        {"shape", m.shape},
                        {"cells", m.num_cells()},
                        {"total", m.total},
                        {"rho", m.rho},
                        {"noise_variance", m.noise_variance}};
  const char* state = m.state == MarginalState::kExact   ? "exact"
                      : m.state == MarginalState::kNoisy ? "noisy"
                                                         : "consistent";
  doc["state"] = state;
  if (include_cells) doc["values"] = m.cells;
  return doc.dump();
}

}  // namespace tracesyn
