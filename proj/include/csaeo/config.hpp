// Copyright 2026 The CSA-EO Authors. All Rights Reserved.
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

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace csaeo::config {

/// Parse or validation failure; `what()` carries "<source>:<line>: <message>" when a line is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Scalar = std::variant<bool, std::int64_t, double, std::string>;
using Array = std::vector<Scalar>;

struct Value {
  std::variant<Scalar, Array> data;
  int line = 0;
};

/// Key/value document in a TOML subset: [section] and [section.sub] headers, `key = value`
/// with strings, integers, floats, booleans and (possibly multi-line) arrays of those, and
/// `#` comments. Keys are addressed as "section.key".
class Document {
 public:
  static Document parse(std::string_view text, std::string source = "<config>");
  static Document load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  bool get_bool(const std::string& key, bool fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::size_t> get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const;
  std::vector<std::uint64_t> get_u64s(const std::string& key, const std::vector<std::uint64_t>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Throws ConfigError naming the first key that no getter has read.
  void reject_unknown() const;

  /// Error message prefixed with the key's source location.
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  const std::string& source() const noexcept { return source_; }
  std::vector<std::string> keys() const;

 private:
  const Value* find(const std::string& key) const;

  std::string source_;
  std::map<std::string, Value> values_;
  mutable std::set<std::string> used_;
};

}  // namespace csaeo::config
