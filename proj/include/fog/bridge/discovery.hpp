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

#ifndef FOG__BRIDGE__DISCOVERY_HPP_
#define FOG__BRIDGE__DISCOVERY_HPP_

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "fog/common/bytes.hpp"
#include "fog/common/ids.hpp"
#include "fog/registry/table.hpp"
#include "fog/wire/codec.hpp"
#include "fog/wire/topic.hpp"

namespace fog::bridge
{

enum class Direction : std::uint8_t
{
  kEdgeToCloud = 0,
  kCloudToEdge = 1,
};

std::string_view to_string(Direction d);
/// Side an envelope travelling in `d` is published on.
wire::Origin source_side(Direction d);
Direction outbound_from(wire::Origin side);

struct BridgeEntry
{
  TopicName topic;
  Direction direction;

  auto operator<=>(const BridgeEntry &) const = default;
};

using BridgeTable = std::set<BridgeEntry>;

struct Presence
{
  bool has_pub{false};
  bool has_sub{false};

  bool operator==(const Presence &) const = default;
};

/// Per-topic publisher/subscriber presence on one side.
using Summary = std::map<TopicName, Presence>;

/// Reserved namespace for the monitor topics; never bridged.
inline constexpr std::string_view kMonitorPrefix = "/fogros/";

/// Builds a summary, skipping registrations owned by `exclude` and monitor topics.
Summary summarize(const registry::RegistryTable & table, const std::optional<NodeId> & exclude = {});

BridgeTable discover_bridgeable(const Summary & edge, const Summary & cloud);
BridgeTable discover_bridgeable(const registry::RegistryTable & edge, const registry::RegistryTable & cloud);

struct TopicPolicy
{
  enum class Mode
  {
    kAuto,
    kExplicit,
  };

  Mode mode{Mode::kAuto};
  std::vector<TopicName> topics;
  std::chrono::milliseconds poll_interval{500};

  static TopicPolicy automatic(std::chrono::milliseconds poll = std::chrono::milliseconds(500));
  /// Throws Error(kInvalidManifest) when `topics` is empty.
  static TopicPolicy explicit_list(std::vector<TopicName> topics,
    std::chrono::milliseconds poll = std::chrono::milliseconds(500));
};

/// Restricts `table` to the topics allowed by `policy`.
BridgeTable apply_policy(const BridgeTable & table, const TopicPolicy & policy);

Bytes encode_summary(const Summary & s);
std::optional<Summary> decode_summary(ByteView body);

}  // namespace fog::bridge

#endif  // FOG__BRIDGE__DISCOVERY_HPP_
