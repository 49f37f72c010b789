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

#include "fog/bridge/discovery.hpp"

#include "fog/common/error.hpp"

namespace fog::bridge
{

std::string_view to_string(Direction d)
{
  return d == Direction::kEdgeToCloud ? "edge->cloud" : "cloud->edge";
}

wire::Origin source_side(Direction d)
{
  return d == Direction::kEdgeToCloud ? wire::Origin::kEdge : wire::Origin::kCloud;
}

Direction outbound_from(wire::Origin side)
{
  return side == wire::Origin::kEdge ? Direction::kEdgeToCloud : Direction::kCloudToEdge;
}

Summary summarize(const registry::RegistryTable & table, const std::optional<NodeId> & exclude)
{
  Summary out;
  for (const auto & [topic, rec] : table.topics) {
    if (topic.str().rfind(kMonitorPrefix, 0) == 0) {
      continue;
    }
    Presence p;
    for (const auto & [id, ep] : rec.publishers) {
      p.has_pub = p.has_pub || !exclude || id != *exclude;
    }
    for (const auto & [id, ep] : rec.subscribers) {
      p.has_sub = p.has_sub || !exclude || id != *exclude;
    }
    if (p.has_pub || p.has_sub) {
      out.emplace(topic, p);
    }
  }
  return out;
}

BridgeTable discover_bridgeable(const Summary & edge, const Summary & cloud)
{
  BridgeTable out;
  for (const auto & [topic, e] : edge) {
    auto it = cloud.find(topic);
    if (it == cloud.end()) {
      continue;
    }
    const auto & c = it->second;
    if (e.has_pub && c.has_sub) {
      out.insert({topic, Direction::kEdgeToCloud});
    }
    if (c.has_pub && e.has_sub) {
      out.insert({topic, Direction::kCloudToEdge});
    }
  }
  return out;
}

BridgeTable discover_bridgeable(const registry::RegistryTable & edge, const registry::RegistryTable & cloud)
{
  return discover_bridgeable(summarize(edge), summarize(cloud));
}

TopicPolicy TopicPolicy::automatic(std::chrono::milliseconds poll)
{
  TopicPolicy p;
  p.poll_interval = poll;
  return p;
}

TopicPolicy TopicPolicy::explicit_list(std::vector<TopicName> topics, std::chrono::milliseconds poll)
{
  if (topics.empty()) {
    throw Error(ErrorCode::kInvalidManifest, "explicit topic policy needs at least one topic");
  }
  TopicPolicy p;
  p.mode = Mode::kExplicit;
  p.topics = std::move(topics);
  p.poll_interval = poll;
  return p;
}

BridgeTable apply_policy(const BridgeTable & table, const TopicPolicy & policy)
{
  if (policy.mode == TopicPolicy::Mode::kAuto) {
    return table;
  }
  std::set<TopicName> allowed(policy.topics.begin(), policy.topics.end());
  BridgeTable out;
  for (const auto & e : table) {
    if (allowed.count(e.topic)) {
      out.insert(e);
    }
  }
  return out;
}

Bytes encode_summary(const Summary & s)
{
  ByteWriter w;
  w.u16(static_cast<std::uint16_t>(s.size()));
  for (const auto & [topic, p] : s) {
    w.str8(topic.str());
    w.u8(static_cast<std::uint8_t>((p.has_pub ? 1 : 0) | (p.has_sub ? 2 : 0)));
  }
  return w.take();
}

std::optional<Summary> decode_summary(ByteView body)
{
  ByteReader r(body);
  std::uint16_t n = 0;
  if (!r.u16(n)) {
    return std::nullopt;
  }
  Summary out;
  for (std::uint16_t i = 0; i < n; ++i) {
    std::string name;
    std::uint8_t flags = 0;
    if (!r.str8(name) || !r.u8(flags) || flags > 3) {
      return std::nullopt;
    }
    auto topic = TopicName::parse(name);
    if (!topic) {
      return std::nullopt;
    }
    out[*topic] = Presence{(flags & 1) != 0, (flags & 2) != 0};
  }
  if (!r.done()) {
    return std::nullopt;
  }
  return out;
}

}  // namespace fog::bridge
