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

#include <filesystem>
#include <string>

#include "datagen.hpp"
#include "doctest.h"
#include "error.hpp"
#include "trace.hpp"

using namespace tracesyn;
using namespace tracesyn::testing;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("tracesyn_test_" + name)).string();
}

const char* kUgrHeader = "ts,td,srcip,dstip,srcport,dstport,proto,pkt,byt,type\n";

}  // namespace

TEST_SUITE("trace") {
  TEST_CASE("three-row flow CSV parses to three records") {
    std::string csv = std::string(kUgrHeader) +
                      "1000,5,10.0.0.1,42.219.150.240,40000,443,TCP,3,180,background\n"
                      "1001,0,10.0.0.2,42.219.150.241,40001,53,UDP,1,60,background\n"
                      "1002,9,10.0.0.3,42.219.150.242,40002,21,TCP,10,4000,scan\n";
    TraceDataset d = parse_csv(csv, ugr16_schema());
    CHECK(d.size() == 3);
    CHECK(d.provenance == Provenance::kRaw);
    CHECK(std::get<std::int64_t>(d.records[0].values[2]) == ipv4(10, 0, 0, 1));
    CHECK(std::get<std::string>(d.records[2].values[9]) == "scan");
  }

  TEST_CASE("port out of range is reported with row and column") {
    std::string csv = std::string(kUgrHeader) +
                      "1000,5,10.0.0.1,42.219.150.240,40000,443,TCP,3,180,background\n"
                      "1001,0,10.0.0.2,42.219.150.241,70000,53,UDP,1,60,background\n";
    try {
      parse_csv(csv, ugr16_schema());
      FAIL("expected a data error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kData);
      std::string msg = e.what();
      CHECK(msg.find("row 2") != std::string::npos);
      CHECK(msg.find("srcport") != std::string::npos);
      CHECK(msg.find("65535") != std::string::npos);
    }
  }

  TEST_CASE("unknown column, missing file and bad value are errors") {
    std::string bad_header = "ts,td,srcip,dstip,srcport,dstport,proto,pkt,byt,label\n1,1,1.1.1.1,1.1.1.1,1,1,TCP,1,1,x\n";
    CHECK_THROWS_AS(parse_csv(bad_header, ugr16_schema()), Error);
    CHECK_THROWS_AS(load_csv("/nonexistent/trace.csv", ugr16_schema()), Error);
    std::string bad_value = std::string(kUgrHeader) + "1000,5,10.0.0.1,42.219.150.240,40000,443,TCP,three,180,x\n";
    try {
      parse_csv(bad_value, ugr16_schema());
      FAIL("expected a data error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("pkt") != std::string::npos);
    }
  }

  TEST_CASE("columns may appear in any order") {
    std::string csv = "type,byt,pkt,proto,dstport,srcport,dstip,srcip,td,ts\nscan,10,2,TCP,80,5000,1.2.3.4,5.6.7.8,0,7\n";
    TraceDataset d = parse_csv(csv, ugr16_schema());
    REQUIRE(d.size() == 1);
    CHECK(std::get<std::int64_t>(d.records[0].values[0]) == 7);
    CHECK(std::get<std::int64_t>(d.records[0].values[8]) == 10);
  }

  TEST_CASE("write then reload is value-for-value identical") {
    TraceDataset d = ugr16_like(100, 3);
    std::string path = temp_path("roundtrip.csv");
    write_csv(d, path);
    TraceDataset back = load_csv(path, d.schema);
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(back.records[i] == d.records[i]);
    std::filesystem::remove(path);
  }

  TEST_CASE("round trip covers every field kind and keeps schema order in the header") {
    TraceDataset d;
    d.schema = {field("when", FieldKind::kTimestamp), field("addr", FieldKind::kIp), field("port", FieldKind::kPort),
                field("kind", FieldKind::kCategorical), field("n", FieldKind::kInteger), field("x", FieldKind::kFloat)};
    d.records.push_back({{std::int64_t{1}, ipv4(255, 255, 255, 255), std::int64_t{65535}, std::string("a"),
                          std::int64_t{0}, 0.1}});
    d.records.push_back({{std::int64_t{2}, ipv4(0, 0, 0, 0), std::int64_t{0}, std::string("b-c"),
                          std::int64_t{123456789}, 1e-300}});
    std::string csv = to_csv(d);
    CHECK(csv.rfind("when,addr,port,kind,n,x\n", 0) == 0);
    CHECK(csv.find("255.255.255.255") != std::string::npos);
    TraceDataset back = parse_csv(csv, d.schema);
    REQUIRE(back.size() == 2);
    CHECK(back.records[0] == d.records[0]);
    CHECK(back.records[1] == d.records[1]);
  }

  TEST_CASE("writing an empty dataset fails") {
    TraceDataset d;
    d.schema = ugr16_schema();
    CHECK_THROWS_AS(to_csv(d), Error);
    CHECK_THROWS_AS(write_csv(d, temp_path("empty.csv")), Error);
  }

  TEST_CASE("unwritable path fails") {
    TraceDataset d = ugr16_like(3, 1);
    CHECK_THROWS_AS(write_csv(d, "/nonexistent/dir/out.csv"), Error);
  }

  TEST_CASE("validate_schema on valid data is empty") {
    CHECK(validate_schema(ugr16_like(50, 2)).empty());
  }

  TEST_CASE("negative byt gives exactly one violation") {
    TraceDataset d = ugr16_like(20, 2);
    d.records[7].values[8] = std::int64_t{-5};
    auto v = validate_schema(d);
    REQUIRE(v.size() == 1);
    CHECK(v[0].row == 7);
    CHECK(v[0].attribute == "byt");
  }

  TEST_CASE("duplicate attribute name is a schema-level violation") {
    TraceDataset d = ugr16_like(5, 2);
    d.schema[1].name = "ts";
    auto v = validate_schema(d);
    REQUIRE(!v.empty());
    CHECK(!v[0].row.has_value());
  }

  TEST_CASE("two labels and an empty raw dataset are violations") {
    Schema s = ugr16_schema();
    s[6].role = FieldRole::kLabel;
    CHECK(!validate_fields(s).empty());
    TraceDataset empty;
    empty.schema = ugr16_schema();
    CHECK(!validate_schema(empty).empty());
  }

  TEST_CASE("loading preserves row count and order") {
    TraceDataset d = ugr16_like(500, 9);
    TraceDataset back = parse_csv(to_csv(d), d.schema);
    REQUIRE(back.size() == 500);
    for (std::size_t i = 0; i < d.size(); ++i) REQUIRE(back.records[i].values[0] == d.records[i].values[0]);
  }

  TEST_CASE("schema JSON round trip and bad kinds") {
    Schema s = ugr16_schema();
    CHECK(parse_schema_json(schema_to_json(s)) == s);
    CHECK_THROWS_AS(parse_schema_json(R"([{"name":"a","kind":"ipv6"}])"), Error);
    CHECK_THROWS_AS(parse_schema_json(R"([{"name":"a","kind":"ip"},{"name":"a","kind":"port"}])"), Error);
  }

  TEST_CASE("ipv4 text conversion") {
    CHECK(format_ipv4(static_cast<std::uint32_t>(ipv4(10, 0, 0, 5))) == "10.0.0.5");
    CHECK(parse_ipv4("192.168.1.254") == static_cast<std::uint32_t>(ipv4(192, 168, 1, 254)));
    CHECK(!parse_ipv4("256.1.1.1").has_value());
    CHECK(!parse_ipv4("1.2.3").has_value());
  }
}
