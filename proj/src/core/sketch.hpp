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

#include <cstdint>
#include <vector>

namespace tracesyn {

// h(x) = ((a x + b) mod (2^61 - 1)) mod range, drawn from a seeded stream.
class PairwiseHash {
 public:
  static constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

  PairwiseHash() = default;
  PairwiseHash(std::uint64_t a, std::uint64_t b, std::uint64_t range);

  std::uint64_t operator()(std::uint64_t key) const noexcept;
  std::uint64_t range() const noexcept { return range_; }

 private:
  std::uint64_t a_ = 1;
  std::uint64_t b_ = 0;
  std::uint64_t range_ = 1;
};

class CountMinSketch {
 public:
  CountMinSketch(std::size_t width, std::size_t depth, std::uint64_t seed);

  void insert(std::uint64_t key, std::uint64_t count = 1);
  std::uint64_t query(std::uint64_t key) const;

  std::size_t width() const noexcept { return width_; }
  std::size_t depth() const noexcept { return rows_.size(); }

 private:
  std::size_t width_;
  std::vector<PairwiseHash> rows_;
  std::vector<std::uint64_t> counters_;
};

class CountSketch {
 public:
  CountSketch(std::size_t width, std::size_t depth, std::uint64_t seed);

  void insert(std::uint64_t key, std::int64_t count = 1);
  // Median over rows.
  double query(std::uint64_t key) const;
  // One row's signed estimate.
  std::int64_t row_estimate(std::size_t row, std::uint64_t key) const;

  std::size_t width() const noexcept { return width_; }
  std::size_t depth() const noexcept { return buckets_.size(); }

 private:
  std::size_t width_;
  std::vector<PairwiseHash> buckets_;
  std::vector<PairwiseHash> signs_;
  std::vector<std::int64_t> counters_;
};

}  // namespace tracesyn
