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

#ifndef FOG__COMMON__KVFILE_HPP_
#define FOG__COMMON__KVFILE_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "fog/common/error.hpp"

namespace fog
{

/// Error carrying the 1-based source line it refers to.
class ParseError : public Error
{
public:
  ParseError(ErrorCode code, int line, const std::string & what)
  : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const noexcept {return line_;}

private:
  int line_;
};

struct KvEntry
{
  std::string key;
  std::string value;
  int line = 0;
};

struct KvSection
{
  std::string kind;
  std::string name;
  int line = 0;
  std::vector<KvEntry> entries;

  const KvEntry * find(std::string_view key) const;
};

/// Reads `[kind name]` headers followed by `key = value` lines. Lines whose
/// first non-blank character is `#` are comments.
std::vector<KvSection> parse_sections(std::string_view text);

std::vector<std::string> split_list(std::string_view value, int line);
std::string join_list(const std::vector<std::string> & items);
std::string_view trim(std::string_view s);

bool parse_bool(std::string_view value, int line);
long long parse_int(std::string_view value, int line);
double parse_double(std::string_view value, int line);

/// Writes `[kind name]` followed by the entries, one per line.
std::string render_section(const KvSection & section);

}  // namespace fog

#endif  // FOG__COMMON__KVFILE_HPP_
