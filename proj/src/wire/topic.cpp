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

#include "fog/wire/topic.hpp"

#include "fog/common/error.hpp"

namespace fog
{

TopicName::TopicName(std::string value)
: value_(std::move(value))
{
  if (!is_valid(value_)) {
    throw Error(ErrorCode::kInvalidTopic, "invalid topic name '" + value_ + "'");
  }
}

std::optional<TopicName> TopicName::parse(std::string_view value)
{
  if (!is_valid(value)) {
    return std::nullopt;
  }
  return TopicName(Unchecked{}, std::string(value));
}

bool TopicName::is_valid(std::string_view value)
{
  if (value.empty() || value.size() > kMaxLength || value.front() != '/') {
    return false;
  }
  char prev = '\0';
  for (char c : value) {
    bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
      c == '_' || c == '/';
    if (!ok) {
      return false;
    }
    if (c == '/' && prev == '/') {
      return false;
    }
    prev = c;
  }
  return value.back() != '/';
}

}  // namespace fog
