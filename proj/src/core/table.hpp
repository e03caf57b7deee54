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

#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace tracesyn {

enum class MarginalState { kExact, kNoisy, kConsistent };

/// A k-way contingency table over binned attributes, stored dense and
/// row-major: the last attribute varies fastest.
struct Marginal {
  std::vector<std::string> attributes;
  std::vector<std::uint32_t> shape;  // domain size per attribute
  std::vector<double> cells;
  double total = 0.0;
  MarginalState state = MarginalState::kExact;
  double rho = 0.0;             // budget spent publishing it (0 for exact tables)
  double noise_variance = 0.0;  // per-cell Gaussian variance, 1 / (2 rho)

  std::size_t num_cells() const noexcept { return cells.size(); }
  std::size_t arity() const noexcept { return attributes.size(); }

  /// Position of `name` in `attributes`, or npos.
  std::size_t position(const std::string& name) const noexcept {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
      if (attributes[i] == name) return i;
    }
    return npos;
  }
  bool contains(const std::string& name) const noexcept { return position(name) != npos; }

  std::size_t flat_index(const std::vector<std::uint32_t>& index) const noexcept {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < shape.size(); ++i) flat = flat * shape[i] + index[i];
    return flat;
  }
  std::vector<std::uint32_t> unflatten(std::size_t flat) const {
    std::vector<std::uint32_t> index(shape.size());
    for (std::size_t i = shape.size(); i-- > 0;) {
      index[i] = static_cast<std::uint32_t>(flat % shape[i]);
      flat /= shape[i];
    }
    return index;
  }
  /// Distance between consecutive values of attribute `pos` in flat indices.
  std::size_t stride(std::size_t pos) const noexcept {
    std::size_t s = 1;
    for (std::size_t i = pos + 1; i < shape.size(); ++i) s *= shape[i];
    return s;
  }
  double cell_sum() const noexcept { return std::accumulate(cells.begin(), cells.end(), 0.0); }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Product of domain sizes, saturating instead of overflowing.
inline std::uint64_t domain_product(const std::vector<std::uint32_t>& shape) noexcept {
  std::uint64_t p = 1;
  for (auto s : shape) {
    if (s != 0 && p > UINT64_MAX / s) return UINT64_MAX;
    p *= s;
  }
  return p;
}

}  // namespace tracesyn
