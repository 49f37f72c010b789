// Copyright 2026 The fogbridge Authors
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

#include "fog/common/kvfile.hpp"

#include <cctype>
#include <charconv>
#include <set>

namespace fog
{
namespace
{

bool is_token_char(char c)
{
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
         c == ':' || c == '/';
}

bool is_token(std::string_view s)
{
  if (s.empty()) {
    return false;
  }
  for (char c : s) {
    if (!is_token_char(c)) {
      return false;
    }
  }
  return true;
}

bool is_key(std::string_view s)
{
  if (s.empty()) {
    return false;
  }
  for (char c : s) {
    if (!(std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
      c == '_'))
    {
      return false;
    }
  }
  return true;
}

}  // namespace

std::string_view trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

const KvEntry * KvSection::find(std::string_view key) const
{
  for (const auto & e : entries) {
    if (e.key == key) {
      return &e;
    }
  }
  return nullptr;
}

std::vector<KvSection> parse_sections(std::string_view text)
{
  std::vector<KvSection> out;
  std::set<std::string> seen_keys;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError(ErrorCode::kSyntaxError, line_no, "unterminated section header");
      }
      auto inner = trim(line.substr(1, line.size() - 2));
      auto sp = inner.find_first_of(" \t");
      if (sp == std::string_view::npos) {
        throw ParseError(ErrorCode::kSyntaxError, line_no, "section header needs a kind and a name");
      }
      auto kind = inner.substr(0, sp);
      auto name = trim(inner.substr(sp));
      if (!is_key(kind) || !is_token(name)) {
        throw ParseError(ErrorCode::kSyntaxError, line_no, "malformed section header");
      }
      out.push_back(KvSection{std::string(kind), std::string(name), line_no, {}});
      seen_keys.clear();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(ErrorCode::kSyntaxError, line_no, "expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (!is_key(key)) {
      throw ParseError(ErrorCode::kSyntaxError, line_no, "malformed key");
    }
    if (out.empty()) {
      throw ParseError(ErrorCode::kSyntaxError, line_no, "key outside of any section");
    }
    if (!seen_keys.insert(std::string(key)).second) {
      throw ParseError(ErrorCode::kSyntaxError, line_no, "duplicate key '" + std::string(key) + "'");
    }
    out.back().entries.push_back(KvEntry{std::string(key), std::string(value), line_no});
  }
  return out;
}

std::vector<std::string> split_list(std::string_view value, int line)
{
  std::vector<std::string> out;
  if (trim(value).empty()) {
    return out;
  }
  while (true) {
    auto comma = value.find(',');
    auto item = trim(value.substr(0, comma));
    if (item.empty()) {
      throw ParseError(ErrorCode::kSyntaxError, line, "empty list item");
    }
    out.emplace_back(item);
    if (comma == std::string_view::npos) {
      break;
    }
    value.remove_prefix(comma + 1);
  }
  return out;
}

std::string join_list(const std::vector<std::string> & items)
{
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) {
      out += ", ";
    }
    out += items[i];
  }
  return out;
}

bool parse_bool(std::string_view value, int line)
{
  if (value == "true" || value == "yes" || value == "1") {
    return true;
  }
  if (value == "false" || value == "no" || value == "0") {
    return false;
  }
  throw ParseError(ErrorCode::kSyntaxError, line, "expected a boolean");
}

long long parse_int(std::string_view value, int line)
{
  long long v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || p != value.data() + value.size()) {
    throw ParseError(ErrorCode::kSyntaxError, line, "expected an integer");
  }
  return v;
}

double parse_double(std::string_view value, int line)
{
  double v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || p != value.data() + value.size()) {
    throw ParseError(ErrorCode::kSyntaxError, line, "expected a number");
  }
  return v;
}

std::string render_section(const KvSection & section)
{
  std::string out = "[" + section.kind + " " + section.name + "]\n";
  for (const auto & e : section.entries) {
    out += e.key;
    out += " = ";
    out += e.value;
    out += '\n';
  }
  return out;
}

}  // namespace fog
