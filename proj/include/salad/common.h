//
// Copyright 2026 The Salad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef SALAD_COMMON_H_
#define SALAD_COMMON_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace salad {

// Base class for recoverable failures (bad input files, bad configs, remote
// errors). Programming errors use ContractViolation instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Lowercase hex SHA-256 digest of `data`.
std::string Sha256Hex(std::string_view data);

std::string ReadFile(const std::filesystem::path& path);

// Writes `contents` to a sibling temporary file and renames it over `path`,
// so readers never observe a partially written file.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view contents);

// Trims ASCII whitespace from both ends.
std::string_view Trim(std::string_view s);

std::string ToLowerAscii(std::string_view s);

}  // namespace salad

#endif  // SALAD_COMMON_H_
