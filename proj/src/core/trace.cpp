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

#include "trace.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "error.hpp"
#include "json.hpp"

namespace tracesyn {
namespace {

constexpr std::int64_t kMaxPort = 65535;
constexpr std::int64_t kMaxIp = 0xffffffffLL;
constexpr std::size_t kMaxReportedErrors = 50;

template <typename T>
std::optional<T> parse_number(std::string_view text) noexcept {
  T out{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return out;
}

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

// Field-level invariant for an already-parsed value; empty string when fine.
std::string check_value(FieldKind kind, const Value& value) {
  switch (kind) {
    case FieldKind::kIp: {
      auto v = std::get<std::int64_t>(value);
      if (v < 0 || v > kMaxIp) return "IP address outside 32-bit range";
      return {};
    }
    case FieldKind::kPort: {
      auto v = std::get<std::int64_t>(value);
      if (v < 0 || v > kMaxPort) return "port " + std::to_string(v) + " outside [0, 65535]";
      return {};
    }
    case FieldKind::kInteger: {
      auto v = std::get<std::int64_t>(value);
      if (v < 0) return "negative counter value " + std::to_string(v);
      return {};
    }
    case FieldKind::kFloat: {
      double v = std::get<double>(value);
      if (!(v >= 0.0)) return "negative or non-finite counter value";
      return {};
    }
    case FieldKind::kCategorical:
    case FieldKind::kTimestamp:
      return {};
  }
  return {};
}

bool holds_expected_type(FieldKind kind, const Value& value) {
  switch (kind) {
    case FieldKind::kCategorical:
      return std::holds_alternative<std::string>(value);
    case FieldKind::kFloat:
      return std::holds_alternative<double>(value);
    default:
      return std::holds_alternative<std::int64_t>(value);
  }
}

}  // namespace

std::string_view to_string(FieldKind kind) noexcept {
  switch (kind) {
    case FieldKind::kIp: return "ip";
    case FieldKind::kPort: return "port";
    case FieldKind::kCategorical: return "categorical";
    case FieldKind::kInteger: return "integer";
    case FieldKind::kFloat: return "float";
    case FieldKind::kTimestamp: return "timestamp";
  }
  return "unknown";
}

std::string_view to_string(FieldRole role) noexcept {
  switch (role) {
    case FieldRole::kFeature: return "feature";
    case FieldRole::kLabel: return "label";
    case FieldRole::kKeyAttribute: return "key-attribute";
    case FieldRole::kGroupIdentifierPart: return "group-identifier-part";
  }
  return "unknown";
}

FieldKind parse_field_kind(std::string_view text) {
  if (text == "ip") return FieldKind::kIp;
  if (text == "port") return FieldKind::kPort;
  if (text == "categorical") return FieldKind::kCategorical;
  if (text == "integer") return FieldKind::kInteger;
  if (text == "float") return FieldKind::kFloat;
  if (text == "timestamp") return FieldKind::kTimestamp;
  throw config_error("unknown field kind '" + std::string(text) + "'");
}

FieldRole parse_field_role(std::string_view text) {
  if (text == "feature") return FieldRole::kFeature;
  if (text == "label") return FieldRole::kLabel;
  if (text == "key-attribute") return FieldRole::kKeyAttribute;
  if (text == "group-identifier-part") return FieldRole::kGroupIdentifierPart;
  throw config_error("unknown field role '" + std::string(text) + "'");
}

std::optional<std::size_t> TraceDataset::find(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t TraceDataset::index_of(std::string_view name) const {
  if (auto idx = find(name)) return *idx;
  throw data_error("unknown attribute '" + std::string(name) + "'");
}

std::string to_string(const Violation& violation) {
  std::ostringstream out;
  if (violation.row) out << "row " << (*violation.row + 1) << ", ";
  out << "column " << violation.attribute << ": " << violation.message;
  return out.str();
}

std::vector<Violation> validate_fields(const Schema& schema) {
  std::vector<Violation> out;
  std::set<std::string> seen;
  std::size_t labels = 0;
  for (const auto& field : schema) {
    if (field.name.empty()) out.push_back({std::nullopt, field.name, "empty attribute name"});
    if (!seen.insert(field.name).second) {
      out.push_back({std::nullopt, field.name, "duplicate attribute name"});
    }
    if (field.role == FieldRole::kLabel) ++labels;
  }
  if (labels > 1) out.push_back({std::nullopt, "<schema>", "more than one label attribute"});
  return out;
}

std::vector<Violation> validate_schema(const TraceDataset& dataset) {
  std::vector<Violation> out = validate_fields(dataset.schema);
  if (dataset.provenance == Provenance::kRaw && dataset.records.empty()) {
    out.push_back({std::nullopt, "<dataset>", "raw dataset has no records"});
  }
  const auto& schema = dataset.schema;
  for (std::size_t r = 0; r < dataset.records.size(); ++r) {
    const auto& values = dataset.records[r].values;
    if (values.size() != schema.size()) {
      out.push_back({r, "<record>", "expected " + std::to_string(schema.size()) +
                                        " values, found " + std::to_string(values.size())});
      continue;
    }
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (!holds_expected_type(schema[c].kind, values[c])) {
        out.push_back({r, schema[c].name, "value type does not match kind " +
                                              std::string(to_string(schema[c].kind))});
        continue;
      }
      std::string problem = check_value(schema[c].kind, values[c]);
      if (!problem.empty()) out.push_back({r, schema[c].name, std::move(problem)});
    }
  }
  return out;
}

Schema parse_schema_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("schema JSON: ") + e.what());
  }
  if (!doc.is_array()) throw config_error("schema JSON must be an array of {name, kind, role}");
  Schema schema;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("name") || !item.contains("kind")) {
      throw config_error("schema entry needs 'name' and 'kind'");
    }
    FieldSchema field;
    field.name = item.at("name").get<std::string>();
    field.kind = parse_field_kind(item.at("kind").get<std::string>());
    if (item.contains("role")) field.role = parse_field_role(item.at("role").get<std::string>());
    schema.push_back(std::move(field));
  }
  auto violations = validate_fields(schema);
  if (!violations.empty()) throw config_error("schema: " + to_string(violations.front()));
  return schema;
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open schema file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema_json(buf.str());
}

std::string schema_to_json(const Schema& schema) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& f : schema) {
    doc.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"role", to_string(f.role)}});
  }
  return doc.dump();
}

std::string format_ipv4(std::uint32_t addr) {
  std::ostringstream out;
  out << ((addr >> 24) & 0xff) << '.' << ((addr >> 16) & 0xff) << '.' << ((addr >> 8) & 0xff)
      << '.' << (addr & 0xff);
  return out.str();
}

std::optional<std::uint32_t> parse_ipv4(std::string_view text) noexcept {
  std::uint32_t addr = 0;
  for (int octet = 0; octet < 4; ++octet) {
    std::size_t dot = text.find('.');
    std::string_view part = octet < 3 ? text.substr(0, dot) : text;
    if (octet < 3 && dot == std::string_view::npos) return std::nullopt;
    if (part.empty() || part.size() > 3) return std::nullopt;
    auto v = parse_number<unsigned>(part);
    if (!v || *v > 255) return std::nullopt;
    addr = (addr << 8) | *v;
    if (octet < 3) text.remove_prefix(dot + 1);
  }
  return addr;
}

std::string format_value(FieldKind kind, const Value& value) {
  switch (kind) {
    case FieldKind::kIp:
      return format_ipv4(static_cast<std::uint32_t>(std::get<std::int64_t>(value)));
    case FieldKind::kCategorical:
      return std::get<std::string>(value);
    case FieldKind::kFloat: {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), std::get<double>(value));
      return std::string(buf, ptr);
    }
    default:
      return std::to_string(std::get<std::int64_t>(value));
  }
}

std::optional<Value> parse_value(FieldKind kind, std::string_view text) {
  switch (kind) {
    case FieldKind::kIp: {
      if (auto addr = parse_ipv4(text)) return Value(static_cast<std::int64_t>(*addr));
      // Integer-encoded addresses are accepted as well.
      if (auto v = parse_number<std::int64_t>(text)) return Value(*v);
      return std::nullopt;
    }
    case FieldKind::kCategorical:
      if (text.find(',') != std::string_view::npos) return std::nullopt;
      return Value(std::string(text));
    case FieldKind::kFloat:
      if (auto v = parse_number<double>(text)) return Value(*v);
      return std::nullopt;
    default:
      if (auto v = parse_number<std::int64_t>(text)) return Value(*v);
      return std::nullopt;
  }
}

double numeric_value(const Value& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&value)) return *d;
  throw invalid_argument("categorical value has no numeric view");
}

TraceDataset parse_csv(std::string_view text, const Schema& schema) {
  if (auto v = validate_fields(schema); !v.empty()) {
    throw config_error("schema: " + to_string(v.front()));
  }
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    line = text.substr(pos, nl - pos);
    pos = nl + 1;
    return true;
  };

  std::string_view header_line;
  if (!next_line(header_line)) throw data_error("CSV has no header row");
  if (header_line.size() >= 3 && header_line.substr(0, 3) == "\xEF\xBB\xBF") {
    header_line.remove_prefix(3);
  }
  auto header = split_commas(header_line);

  // column position -> schema index
  std::vector<std::size_t> column_field(header.size());
  std::vector<bool> covered(schema.size(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::size_t f = 0;
    while (f < schema.size() && schema[f].name != header[c]) ++f;
    if (f == schema.size()) throw data_error("unknown column '" + std::string(header[c]) + "'");
    if (covered[f]) throw data_error("duplicate column '" + std::string(header[c]) + "'");
    covered[f] = true;
    column_field[c] = f;
  }
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (!covered[f]) throw data_error("missing column '" + schema[f].name + "'");
  }

  TraceDataset out;
  out.schema = schema;
  out.provenance = Provenance::kRaw;
  std::vector<std::string> errors;
  std::size_t total_errors = 0;
  auto report = [&](std::size_t row, const std::string& column, const std::string& msg) {
    ++total_errors;
    if (errors.size() < kMaxReportedErrors) {
      errors.push_back("row " + std::to_string(row) + ", column " + column + ": " + msg);
    }
  };

  std::string_view line;
  std::size_t row = 0;
  while (next_line(line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      report(row, "<all>", "expected " + std::to_string(header.size()) + " fields, found " +
                               std::to_string(cells.size()));
      continue;
    }
    TraceRecord record;
    record.values.resize(schema.size());
    bool ok = true;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& field = schema[column_field[c]];
      auto value = parse_value(field.kind, cells[c]);
      if (!value) {
        report(row, field.name, "cannot parse '" + std::string(cells[c]) + "' as " +
                                    std::string(to_string(field.kind)));
        ok = false;
        continue;
      }
      std::string problem = check_value(field.kind, *value);
      if (!problem.empty()) {
        report(row, field.name, problem);
        ok = false;
        continue;
      }
      record.values[column_field[c]] = std::move(*value);
    }
    if (ok) out.records.push_back(std::move(record));
  }

  if (total_errors > 0) {
    std::ostringstream msg;
    msg << total_errors << " invalid row value(s):";
    for (const auto& e : errors) msg << "\n  " << e;
    if (total_errors > errors.size()) msg << "\n  ...";
    throw data_error(msg.str());
  }
  return out;
}

TraceDataset load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open CSV file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema);
}

std::string to_csv(const TraceDataset& dataset) {
  if (dataset.empty()) throw data_error("refusing to write an empty dataset");
  std::string out;
  const auto& schema = dataset.schema;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c) out += ',';
    out += schema[c].name;
  }
  out += '\n';
  for (const auto& record : dataset.records) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (c) out += ',';
      out += format_value(schema[c].kind, record.values[c]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const TraceDataset& dataset, const std::string& path) {
  std::string text = to_csv(dataset);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write CSV file '" + path + "'");
  out << text;
  if (!out) throw io_error("failed writing CSV file '" + path + "'");
}

}  // namespace tracesyn
