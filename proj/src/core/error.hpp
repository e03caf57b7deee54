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

#include <stdexcept>
#include <string>

namespace tracesyn {

// Error categories map one-to-one onto C API status codes and CLI exit codes.
enum class ErrorKind {
  kInvalidArgument,
  kConfig,
  kData,
  kBudget,
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error invalid_argument(const std::string& message) {
  return Error(ErrorKind::kInvalidArgument, message);
}
inline Error config_error(const std::string& message) {
  return Error(ErrorKind::kConfig, message);
}
inline Error data_error(const std::string& message) {
  return Error(ErrorKind::kData, message);
}
inline Error budget_error(const std::string& message) {
  return Error(ErrorKind::kBudget, message);
}
inline Error io_error(const std::string& message) {
  return Error(ErrorKind::kIo, message);
}

}  // namespace tracesyn
