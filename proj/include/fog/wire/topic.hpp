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

#ifndef FOG__WIRE__TOPIC_HPP_
#define FOG__WIRE__TOPIC_HPP_

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace fog
{

/// A validated topic name such as "/camera/image_raw".
///
/// Rules: begins with '/', only [A-Za-z0-9_/], no empty segments, at most 255 bytes.
class TopicName
{
public:
  static constexpr std::size_t kMaxLength = 255;

  /// Throws Error(kInvalidTopic) when `value` breaks the naming rules.
  explicit TopicName(std::string value);

  static std::optional<TopicName> parse(std::string_view value);
  static bool is_valid(std::string_view value);

  const std::string & str() const {return value_;}

  auto operator<=>(const TopicName &) const = default;

private:
  struct Unchecked {};
  TopicName(Unchecked, std::string value)
  : value_(std::move(value)) {}

  std::string value_;
};

}  // namespace fog

template<>
struct std::hash<fog::TopicName>
{
  std::size_t operator()(const fog::TopicName & t) const noexcept
  {
    return std::hash<std::string>{}(t.str());
  }
};

#endif  // FOG__WIRE__TOPIC_HPP_
