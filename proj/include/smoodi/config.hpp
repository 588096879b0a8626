// Copyright 2026 The smoodi-desk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Flat key=value run configuration. Every key has a default; unknown keys
// are errors. Files are UTF-8, one `key = value` per line, `#` comments.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace smoodi {

class RunConfig {
 public:
  /// All keys at their defaults.
  RunConfig();

  void load_file(const std::filesystem::path& path);
  /// Parses one "key=value" assignment.
  void assign(std::string_view assignment);
  void set(const std::string& key, const std::string& value);

  const std::string& get(std::string_view key) const;
  int get_int(std::string_view key) const;
  float get_float(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;

  const std::map<std::string, std::string, std::less<>>& values() const noexcept {
    return values_;
  }
  /// "key=value" for every key, sorted.
  std::vector<std::string> echo() const;
  /// FNV-1a 64 (16 hex digits) over the echo lines of keys starting with
  /// any of `prefixes`.
  std::string hash(const std::vector<std::string>& prefixes) const;
  std::string hash() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace smoodi
