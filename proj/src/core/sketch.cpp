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

#include "sketch.hpp"

#include <algorithm>

#include "error.hpp"
#include "rng.hpp"

namespace tracesyn {
namespace {

std::uint64_t mod_prime(unsigned __int128 x) noexcept {
  constexpr std::uint64_t p = PairwiseHash::kPrime;
  std::uint64_t lo = static_cast<std::uint64_t>(x & p);
  std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
  std::uint64_t r = lo + hi;
  while (r >= p) r -= p;
  return r;
}

PairwiseHash draw_hash(Rng& rng, std::uint64_t range) {
  std::uint64_t a = rng.uniform_int(1, static_cast<std::int64_t>(PairwiseHash::kPrime - 1));
  std::uint64_t b = rng.uniform_int(0, static_cast<std::int64_t>(PairwiseHash::kPrime - 1));
  return PairwiseHash(a, b, range);
}

void check_shape(std::size_t width, std::size_t depth) {
  if (width == 0 || depth == 0) throw config_error("sketch width and depth must be >= 1");
}

}  // namespace

PairwiseHash::PairwiseHash(std::uint64_t a, std::uint64_t b, std::uint64_t range)
    : a_(a % kPrime), b_(b % kPrime), range_(range) {
  if (range_ == 0) throw invalid_argument("hash range must be positive");
  if (a_ == 0) a_ = 1;
}

std::uint64_t PairwiseHash::operator()(std::uint64_t key) const noexcept {
  std::uint64_t x = mod_prime(key);
  std::uint64_t h = mod_prime(static_cast<unsigned __int128>(a_) * x + b_);
  return h % range_;
}

CountMinSketch::CountMinSketch(std::size_t width, std::size_t depth, std::uint64_t seed) : width_(width) {
  check_shape(width, depth);
  Rng rng(seed, "cms");
  for (std::size_t d = 0; d < depth; ++d) rows_.push_back(draw_hash(rng, width));
  counters_.assign(width * depth, 0);
}

void CountMinSketch::insert(std::uint64_t key, std::uint64_t count) {
  for (std::size_t d = 0; d < rows_.size(); ++d) counters_[d * width_ + rows_[d](key)] += count;
}

std::uint64_t CountMinSketch::query(std::uint64_t key) const {
  std::uint64_t best = UINT64_MAX;
  for (std::size_t d = 0; d < rows_.size(); ++d) best = std::min(best, counters_[d * width_ + rows_[d](key)]);
  return best;
}

CountSketch::CountSketch(std::size_t width, std::size_t depth, std::uint64_t seed) : width_(width) {
  check_shape(width, depth);
  Rng rng(seed, "count-sketch");
  for (std::size_t d = 0; d < depth; ++d) {
    buckets_.push_back(draw_hash(rng, width));
    signs_.push_back(draw_hash(rng, 2));
  }
  counters_.assign(width * depth, 0);
}

void CountSketch::insert(std::uint64_t key, std::int64_t count) {
  for (std::size_t d = 0; d < buckets_.size(); ++d) {
    std::int64_t sign = signs_[d](key) ? 1 : -1;
    counters_[d * width_ + buckets_[d](key)] += sign * count;
  }
}

std::int64_t CountSketch::row_estimate(std::size_t row, std::uint64_t key) const {
  std::int64_t sign = signs_[row](key) ? 1 : -1;
  return sign * counters_[row * width_ + buckets_[row](key)];
}

double CountSketch::query(std::uint64_t key) const {
  std::vector<double> est;
  for (std::size_t d = 0; d < buckets_.size(); ++d) est.push_back(static_cast<double>(row_estimate(d, key)));
  std::sort(est.begin(), est.end());
  std::size_t m = est.size();
  return m % 2 ? est[m / 2] : 0.5 * (est[m / 2 - 1] + est[m / 2]);
}

}  // namespace tracesyn
