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

#include "csaeo/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace csaeo::config {
namespace {

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

class LineParser {
 public:
  LineParser(std::string_view text, const std::string& source, int line) : s_(text), source_(source), line_(line) {}

  [[noreturn]] void error(const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '#') {
      while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      skip_ws();
    }
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  std::string key() {
    skip_ws();
    std::string out;
    while (true) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && is_bare_key_char(s_[pos_])) ++pos_;
      if (pos_ == start) error("expected a key");
      out.append(s_.substr(start, pos_ - start));
      if (peek() != '.') break;
      out.push_back('.');
      ++pos_;
    }
    return out;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }

  Scalar scalar() {
    skip_ws();
    const char c = peek();
    if (c == '"') return string_value();
    if (c == '\0') error("missing value");
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' && s_[pos_] != ' ' &&
           s_[pos_] != '\t' && s_[pos_] != '\n' && s_[pos_] != '\r') {
      ++pos_;
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string digits;
    for (char ch : tok) {
      if (ch != '_') digits.push_back(ch);
    }
    const bool floaty = digits.find_first_of(".eE") != std::string::npos || digits == "inf" || digits == "+inf" ||
                        digits == "-inf" || digits == "nan";
    if (!floaty) {
      std::int64_t v = 0;
      const char* b = digits.data() + (digits.size() > 0 && digits[0] == '+' ? 1 : 0);
      const auto [p, ec] = std::from_chars(b, digits.data() + digits.size(), v);
      if (ec == std::errc() && p == digits.data() + digits.size() && !digits.empty()) return v;
      error("invalid value '" + tok + "'");
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(digits, &used);
      if (used != digits.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      error("invalid number '" + tok + "'");
    }
  }

  std::variant<Scalar, Array> value() {
    skip_ws();
    if (peek() != '[') return scalar();
    ++pos_;
    Array out;
    skip_ws();
    if (peek() == ']') {
      ++pos_;
      return out;
    }
    while (true) {
      skip_ws();
      if (peek() == '[') error("nested arrays are not supported");
      out.push_back(scalar());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        skip_ws();
        if (peek() == ']') {
          ++pos_;
          break;
        }
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        break;
      }
      error("expected ',' or ']' in array");
    }
    return out;
  }

 private:
  std::string string_value() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\n') error("unterminated string");
      if (c == '\\') {
        if (pos_ >= s_.size()) error("unterminated escape");
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: error(std::string("unsupported escape '\\") + e + "'");
        }
      }
      out.push_back(c);
    }
    if (pos_ >= s_.size()) error("unterminated string");
    ++pos_;
    return out;
  }

  std::string_view s_;
  const std::string& source_;
  int line_;
  std::size_t pos_ = 0;
};

// Bracket depth outside strings and comments, to join multi-line arrays.
int bracket_balance(std::string_view line) {
  int depth = 0;
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_str) {
      if (c == '\\') ++i;
      else if (c == '"') in_str = false;
      continue;
    }
    if (c == '#') break;
    if (c == '"') in_str = true;
    else if (c == '[') ++depth;
    else if (c == ']') --depth;
  }
  return depth;
}

const char* type_name(const Scalar& s) {
  switch (s.index()) {
    case 0: return "boolean";
    case 1: return "integer";
    case 2: return "float";
    default: return "string";
  }
}

}  // namespace

Document Document::parse(std::string_view text, std::string source) {
  Document doc;
  doc.source_ = std::move(source);
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const int start_line = line_no;
    LineParser probe(raw, doc.source_, start_line);
    if (probe.at_end()) continue;
    std::string_view trimmed(raw);
    while (!trimmed.empty() && (trimmed.front() == ' ' || trimmed.front() == '\t')) trimmed.remove_prefix(1);
    if (trimmed.front() == '[') {
      LineParser p(trimmed.substr(1), doc.source_, start_line);
      section = p.key();
      p.expect(']');
      if (!p.at_end()) p.error("unexpected text after section header");
      continue;
    }
    std::string joined = raw;
    int depth = bracket_balance(raw);
    while (depth > 0) {
      std::string more;
      if (!std::getline(in, more)) throw ConfigError(doc.source_ + ":" + std::to_string(start_line) + ": unterminated array");
      ++line_no;
      joined += '\n';
      joined += more;
      depth += bracket_balance(more);
    }
    LineParser p(joined, doc.source_, start_line);
    const std::string key = p.key();
    p.expect('=');
    Value v;
    v.data = p.value();
    v.line = start_line;
    if (!p.at_end()) p.error("unexpected text after value");
    const std::string full = section.empty() ? key : section + "." + key;
    if (doc.values_.count(full) != 0) p.error("duplicate key '" + full + "'");
    doc.values_.emplace(full, std::move(v));
  }
  return doc;
}

Document Document::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const Value* Document::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

void Document::fail(const std::string& key, const std::string& message) const {
  const auto it = values_.find(key);
  const std::string where = it == values_.end() ? source_ : source_ + ":" + std::to_string(it->second.line);
  throw ConfigError(where + ": " + key + ": " + message);
}

namespace {

const Scalar& as_scalar(const Document& doc, const std::string& key, const Value& v) {
  if (!std::holds_alternative<Scalar>(v.data)) doc.fail(key, "expected a single value, found an array");
  return std::get<Scalar>(v.data);
}

double scalar_to_double(const Document& doc, const std::string& key, const Scalar& s) {
  if (const auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&s)) return *d;
  doc.fail(key, std::string("expected a number, found a ") + type_name(s));
}

std::int64_t scalar_to_int(const Document& doc, const std::string& key, const Scalar& s) {
  if (const auto* i = std::get_if<std::int64_t>(&s)) return *i;
  doc.fail(key, std::string("expected an integer, found a ") + type_name(s));
}

std::string scalar_to_string(const Document& doc, const std::string& key, const Scalar& s) {
  if (const auto* str = std::get_if<std::string>(&s)) return *str;
  doc.fail(key, std::string("expected a string, found a ") + type_name(s));
}

const Array& as_array(const Document& doc, const std::string& key, const Value& v) {
  if (!std::holds_alternative<Array>(v.data)) doc.fail(key, "expected an array");
  return std::get<Array>(v.data);
}

}  // namespace

bool Document::get_bool(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (v == nullptr) return fallback;
  const Scalar& s = as_scalar(*this, key, *v);
  if (const auto* b = std::get_if<bool>(&s)) return *b;
  fail(key, std::string("expected true or false, found a ") + type_name(s));
}

std::int64_t Document::get_int(const std::string& key, std::int64_t fallback) const {
  const Value* v = find(key);
  return v == nullptr ? fallback : scalar_to_int(*this, key, as_scalar(*this, key, *v));
}

std::size_t Document::get_size(const std::string& key, std::size_t fallback) const {
  const Value* v = find(key);
  if (v == nullptr) return fallback;
  const auto i = scalar_to_int(*this, key, as_scalar(*this, key, *v));
  if (i < 0) fail(key, "must be >= 0");
  return static_cast<std::size_t>(i);
}

std::uint64_t Document::get_u64(const std::string& key, std::uint64_t fallback) const {
  return get_size(key, static_cast<std::size_t>(fallback));
}

double Document::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key);
  return v == nullptr ? fallback : scalar_to_double(*this, key, as_scalar(*this, key, *v));
}

std::string Document::get_string(const std::string& key, const std::string& fallback) const {
  const Value* v = find(key);
  return v == nullptr ? fallback : scalar_to_string(*this, key, as_scalar(*this, key, *v));
}

std::vector<double> Document::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const Value* v = find(key);
  if (v == nullptr) return fallback;
  std::vector<double> out;
  for (const auto& s : as_array(*this, key, *v)) out.push_back(scalar_to_double(*this, key, s));
  return out;
}

std::vector<std::size_t> Document::get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const {
  const Value* v = find(key);
  if (v == nullptr) return fallback;
  std::vector<std::size_t> out;
  for (const auto& s : as_array(*this, key, *v)) {
    const auto i = scalar_to_int(*this, key, s);
    if (i < 0) fail(key, "entries must be >= 0");
    out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

std::vector<std::uint64_t> Document::get_u64s(const std::string& key, const std::vector<std::uint64_t>& fallback) const {
  std::vector<std::size_t> fb(fallback.begin(), fallback.end());
  const auto v = get_sizes(key, fb);
  return {v.begin(), v.end()};
}

std::vector<std::string> Document::get_strings(const std::string& key, const std::vector<std::string>& fallback) const {
  const Value* v = find(key);
  if (v == nullptr) return fallback;
  std::vector<std::string> out;
  for (const auto& s : as_array(*this, key, *v)) out.push_back(scalar_to_string(*this, key, s));
  return out;
}

void Document::reject_unknown() const {
  for (const auto& [key, v] : values_) {
    if (used_.count(key) == 0) {
      throw ConfigError(source_ + ":" + std::to_string(v.line) + ": unknown key '" + key + "'");
    }
  }
}

std::vector<std::string> Document::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

}  // namespace csaeo::config
