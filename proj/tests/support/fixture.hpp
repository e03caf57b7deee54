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

#include <filesystem>
#include <string>

#include "io.hpp"
#include "trace.hpp"

namespace tracesyn::testing {

struct Fixture {
  std::string csv;
  std::string schema;
  std::string dir;
};

/// Fresh scratch directory under the system temp dir.
inline std::string scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tracesyn-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline Fixture write_fixture(const TraceDataset& data, const std::string& name) {
  Fixture f;
  f.dir = scratch_dir(name);
  f.csv = f.dir + "/input.csv";
  f.schema = f.dir + "/schema.json";
  write_csv(data, f.csv);
  write_text(f.schema, schema_to_json(data.schema));
  return f;
}

}  // namespace tracesyn::testing
