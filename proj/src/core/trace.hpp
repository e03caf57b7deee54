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

// Trace schema, header records, and CSV/JSON ingestion.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tracesyn {

enum class FieldKind { kIp, kPort, kCategorical, kInteger, kFloat, kTimestamp };
enum class FieldRole { kFeature, kLabel, kKeyAttribute, kGroupIdentifierPart };

std::string_view to_string(FieldKind kind) noexcept;
std::string_view to_string(FieldRole role) noexcept;
FieldKind parse_field_kind(std::string_view text);
FieldRole parse_field_role(std::string_view text);

/// Counters are the non-negative numeric kinds (pkt, byt, td, pkt_len ...).
inline bool is_counter(FieldKind kind) noexcept {
  return kind == FieldKind::kInteger || kind == FieldKind::kFloat;
}

struct FieldSchema {
  std::string name;
  FieldKind kind = FieldKind::kCategorical;
  FieldRole role = FieldRole::kFeature;

  friend bool operator==(const FieldSchema&, const FieldSchema&) = default;
};

using Schema = std::vector<FieldSchema>;

/// ip, port, integer and timestamp values are int64; float values are double;
/// categorical values are strings.
using Value = std::variant<std::int64_t, double, std::string>;

struct TraceRecord {
  std::vector<Value> values;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

enum class Provenance { kRaw, kEncoded, kSynthetic };

struct TraceDataset {
  Schema schema;
  std::vector<TraceRecord> records;
  Provenance provenance = Provenance::kRaw;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  std::optional<std::size_t> find(std::string_view name) const noexcept;
  /// Throws a data error when `name` is not in the schema.
  std::size_t index_of(std::string_view name) const;
};

struct Violation {
  std::optional<std::size_t> row;  // unset for schema-level violations
  std::string attribute;
  std::string message;
};

std::string to_string(const Violation& violation);

/// Schema-level checks only (unique names, at most one label).
std::vector<Violation> validate_fields(const Schema& schema);

/// Lists every invariant violation in `dataset`; empty iff it is valid.
std::vector<Violation> validate_schema(const TraceDataset& dataset);

Schema parse_schema_json(std::string_view json_text);
Schema load_schema(const std::string& path);
std::string schema_to_json(const Schema& schema);

std::string format_ipv4(std::uint32_t addr);
std::optional<std::uint32_t> parse_ipv4(std::string_view text) noexcept;

/// Renders one value the way it appears in CSV.
std::string format_value(FieldKind kind, const Value& value);
/// Parses one CSV cell; returns nullopt when the text is not of `kind`.
std::optional<Value> parse_value(FieldKind kind, std::string_view text);

/// Numeric view of a value (IPs and ports included). Categoricals throw.
double numeric_value(const Value& value);

/// Reads a header-row CSV whose columns are the schema attributes (any
/// order). Rows that fail to parse or violate a field invariant are all
/// collected and reported together, with row and column, in one data error.
TraceDataset load_csv(const std::string& path, const Schema& schema);
TraceDataset parse_csv(std::string_view text, const Schema& schema);

/// Writes the dataset with the header in schema order.
void write_csv(const TraceDataset& dataset, const std::string& path);
std::string to_csv(const TraceDataset& dataset);

}  // namespace tracesyn
