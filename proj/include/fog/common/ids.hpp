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

#ifndef FOG__COMMON__IDS_HPP_
#define FOG__COMMON__IDS_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fog
{

/// Opaque 16-byte identifier for nodes and publishers.
struct NodeId
{
  std::array<std::uint8_t, 16> bytes{};

  static NodeId random();
  static std::optional<NodeId> from_hex(std::string_view hex);
  std::string hex() const;
  bool is_zero() const;

  auto operator<=>(const NodeId &) const = default;
};

std::string to_hex(const std::uint8_t * data, std::size_t size);
std::optional<std::string> from_hex_bytes(std::string_view hex);

/// Random lowercase hex string with `chars` characters.
std::string random_hex(std::size_t chars);

}  // namespace fog

template<>
struct std::hash<fog::NodeId>
{
  std::size_t operator()(const fog::NodeId & id) const noexcept
  {
    std::size_t h = 0;
    for (auto b : id.bytes) {
      h = h * 131 + b;
    }
    return h;
  }
};

#endif  // FOG__COMMON__IDS_HPP_
