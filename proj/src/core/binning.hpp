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

// Invertible per-attribute binning: type-dependent bins, the group-wise
// tsdiff attribute, DP frequency-dependent merging, encode and decode.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "privacy.hpp"
#include "rng.hpp"
#include "table.hpp"
#include "trace.hpp"

namespace tracesyn {

inline constexpr const char* kTsdiffAttribute = "tsdiff";
inline constexpr std::int64_t kMaxPortValue = 65535;
inline constexpr std::int64_t kMaxIpValue = 0xffffffffLL;

/// Inclusive integer interval.
struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  std::uint64_t size() const noexcept { return static_cast<std::uint64_t>(hi - lo) + 1; }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

enum class BinShape { kSingleton, kRange, kPrefix, kLog, kOther };

std::string_view to_string(BinShape shape) noexcept;

/// One bin. Integer-valued kinds (ip, port, integer, timestamp) describe the
/// bin as a set of disjoint inclusive ranges; categoricals as a label set;
/// float counters as the real interval [lo, hi) (closed on the last bin).
struct Bin {
  BinShape shape = BinShape::kSingleton;
  std::vector<IntRange> atoms;
  std::vector<std::string> labels;
  double lo = 0.0;
  double hi = 0.0;

  static Bin singleton(std::int64_t v) { return {BinShape::kSingleton, {{v, v}}, {}, 0, 0}; }
  static Bin range(std::int64_t lo, std::int64_t hi) {
    return {BinShape::kRange, {{lo, hi}}, {}, 0, 0};
  }
  static Bin label(std::string v) { return {BinShape::kSingleton, {}, {std::move(v)}, 0, 0}; }

  /// Number of distinct raw values (float bins report 0).
  std::uint64_t cardinality() const noexcept;
  /// Numeric bounds of the bin; categorical bins throw.
  double lower() const;
  double upper() const;
  /// True when the bin holds exactly `v` and nothing else.
  bool is_value(std::int64_t v) const noexcept;
  bool is_label(const std::string& v) const noexcept;
};

class BinSpec {
 public:
  BinSpec() = default;
  BinSpec(std::string attribute, FieldKind kind, bool ordered, std::vector<Bin> bins);

  const std::string& attribute() const noexcept { return attribute_; }
  FieldKind kind() const noexcept { return kind_; }
  /// Ordered attributes merge adjacent bins; the rest merge into "other".
  bool ordered() const noexcept { return ordered_; }
  const std::vector<Bin>& bins() const noexcept { return bins_; }
  std::size_t size() const noexcept { return bins_.size(); }

  std::optional<std::uint32_t> find(const Value& value) const;

 private:
  void build_index();

  std::string attribute_;
  FieldKind kind_ = FieldKind::kCategorical;
  bool ordered_ = false;
  std::vector<Bin> bins_;
  struct Slot {
    std::int64_t lo;
    std::int64_t hi;
    std::uint32_t bin;
  };
  std::vector<Slot> int_index_;  // sorted by lo
  std::unordered_map<std::string, std::uint32_t> label_index_;
  std::vector<double> float_upper_;  // upper edge per bin
};

struct BinMapping {
  std::vector<BinSpec> specs;

  std::optional<std::size_t> find(const std::string& attribute) const noexcept;
  const BinSpec& spec(const std::string& attribute) const;
  std::vector<std::uint32_t> domain_sizes() const;
};

struct BinningConfig {
  double ip_threshold_sigmas = 3.0;    // noisy count >= this * sigma keeps an IP un-binned
  double freq_threshold_sigmas = 3.0;  // noisy count < this * sigma is a low-frequency bin
  std::optional<double> freq_threshold;  // absolute override of the above
  std::size_t categorical_max_domain = 64;
  std::size_t log_bins = 32;
  std::int64_t port_threshold = 1024;
  std::int64_t port_width = 10;
  std::int64_t ts_window_ms = 1000;
  std::size_t max_ts_windows = 10000;  // windows widen (doubling) past this
  MarginalSplit split = MarginalSplit::kCellsTwoThirds;
};

/// Masks the low two bits: the /30 prefix an address belongs to.
constexpr std::uint32_t ip_prefix_bin(std::uint32_t addr) noexcept { return addr & ~0x3u; }

/// Aligned width-`width` port range containing `port` (ports >= threshold),
/// capped at 65535.
IntRange port_range(std::int64_t port, std::int64_t threshold = 1024, std::int64_t width = 10);

/// Integer log(1+x) bins covering [0, max_value]. Empty preimages are dropped.
std::vector<IntRange> log_integer_ranges(std::int64_t max_value, std::size_t bins);

/// Bins every attribute by kind. IPs start as one singleton per observed
/// address; low-count addresses fold into /30 prefixes during the
/// frequency-dependent merge, which sees DP counts. Timestamps become
/// fixed-width windows used only for a group's base time.
BinMapping type_dependent_bins(const TraceDataset& dataset, const BinningConfig& config = {});

/// Appends `tsdiff`: per group (records equal on `group_key`), ts minus the
/// previous ts in time order; 0 for the first record of each group.
TraceDataset add_tsdiff(const TraceDataset& dataset, const std::vector<std::string>& group_key);

/// Name of the (single) timestamp attribute, if any.
std::optional<std::string> timestamp_attribute(const Schema& schema);

struct FrequencyMergeResult {
  BinMapping mapping;
  std::vector<Marginal> one_way;  // noisy, over the refined bins, in mapping order
  std::vector<double> thresholds;  // theta_freq used per attribute
};

/// Publishes one noisy 1-way marginal per attribute (rho1 split over
/// attributes), folds low-count IPs into /30 bins, then merges bins whose
/// noisy count is below theta_freq. The noisy 1-way tables are re-aggregated
/// onto the refined bins without further spend.
FrequencyMergeResult frequency_dependent_merge(const BinMapping& mapping,
                                               const TraceDataset& dataset, double rho1,
                                               std::uint64_t seed, const BinningConfig& config = {},
                                               BudgetLedger* ledger = nullptr);

/// Merge rules on their own, applied to noisy counts over `spec`'s bins.
/// Returns the merged spec and, per new bin, the old bins it absorbed.
std::pair<BinSpec, std::vector<std::vector<std::uint32_t>>> merge_low_frequency(
    const BinSpec& spec, const std::vector<double>& noisy, double threshold);

struct EncodedDataset {
  std::vector<std::string> attributes;
  std::vector<std::vector<std::uint32_t>> columns;  // column-major bin indices
  std::vector<std::uint32_t> domain_sizes;
  std::vector<std::string> group_key;

  std::size_t size() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
  std::optional<std::size_t> find(const std::string& attribute) const noexcept;
  std::size_t index_of(const std::string& attribute) const;
};

/// Replaces every value by its bin index. Throws a data error naming the row
/// when a value lies outside every bin.
EncodedDataset encode(const TraceDataset& dataset, const BinMapping& mapping,
                      const std::vector<std::string>& group_key = {});

/// Samples a raw value uniformly from the bin, never past the kind's
/// validity cap (ports <= 65535, IPs < 2^32).
Value decode_value(const Bin& bin, FieldKind kind, Rng& rng);

std::string mapping_to_json(const BinMapping& mapping);

}  // namespace tracesyn
