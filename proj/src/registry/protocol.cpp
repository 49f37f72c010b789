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

#include "fog/registry/protocol.hpp"

#include <algorithm>

namespace fog::proto
{

using registry::Endpoint;
using registry::Role;

void write_endpoint(ByteWriter & w, const Endpoint & ep)
{
  w.str8(ep.node_name.substr(0, 255));
  w.str8(ep.address.substr(0, 255));
  w.raw(ByteView(ep.node_id.bytes));
}

bool read_endpoint(ByteReader & r, Endpoint & ep)
{
  Bytes id;
  if (!r.str8(ep.node_name) || !r.str8(ep.address) || !r.raw(16, id)) {
    return false;
  }
  std::copy(id.begin(), id.end(), ep.node_id.bytes.begin());
  return true;
}

namespace
{

bool read_role(ByteReader & r, Role & role)
{
  std::uint8_t v = 0;
  if (!r.u8(v) || v > 1) {
    return false;
  }
  role = static_cast<Role>(v);
  return true;
}

bool read_topic(ByteReader & r, std::optional<TopicName> & topic)
{
  std::string s;
  if (!r.str8(s)) {
    return false;
  }
  topic = TopicName::parse(s);
  return topic.has_value();
}

void write_endpoints(ByteWriter & w, const std::map<NodeId, Endpoint> & set)
{
  w.u16(static_cast<std::uint16_t>(set.size()));
  for (const auto & [id, ep] : set) {
    write_endpoint(w, ep);
  }
}

bool read_endpoints(ByteReader & r, std::map<NodeId, Endpoint> & set)
{
  std::uint16_t n = 0;
  if (!r.u16(n)) {
    return false;
  }
  for (std::uint16_t i = 0; i < n; ++i) {
    Endpoint ep;
    if (!read_endpoint(r, ep)) {
      return false;
    }
    set.emplace(ep.node_id, ep);
  }
  return true;
}

}  // namespace

Bytes encode_hello(const RegistryHello & h)
{
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(HelloKind::kRegistryClient));
  write_endpoint(w, h.endpoint);
  return w.take();
}

Bytes encode_hello(const PeerHello & h)
{
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(HelloKind::kPeer));
  w.str8(h.topic.str());
  write_endpoint(w, h.publisher);
  return w.take();
}

std::optional<std::variant<RegistryHello, PeerHello>> decode_hello(ByteView body)
{
  ByteReader r(body);
  std::uint8_t kind = 0;
  if (!r.u8(kind)) {
    return std::nullopt;
  }
  if (kind == static_cast<std::uint8_t>(HelloKind::kRegistryClient)) {
    RegistryHello h;
    if (!read_endpoint(r, h.endpoint) || !r.done()) {
      return std::nullopt;
    }
    return h;
  }
  if (kind == static_cast<std::uint8_t>(HelloKind::kPeer)) {
    std::optional<TopicName> topic;
    Endpoint ep;
    if (!read_topic(r, topic) || !read_endpoint(r, ep) || !r.done()) {
      return std::nullopt;
    }
    return PeerHello{*topic, ep};
  }
  return std::nullopt;
}

Bytes encode_registration(const Registration & reg)
{
  ByteWriter w;
  w.u32(reg.request_id);
  w.u8(static_cast<std::uint8_t>(reg.role));
  w.str8(reg.topic.substr(0, 255));
  return w.take();
}

std::optional<Registration> decode_registration(ByteView body)
{
  ByteReader r(body);
  Registration reg;
  if (!r.u32(reg.request_id) || !read_role(r, reg.role) || !r.str8(reg.topic) || !r.done()) {
    return std::nullopt;
  }
  return reg;
}

Bytes encode_ctrl(const RegistryCtrl & c)
{
  ByteWriter w;
  std::visit(
    [&w](const auto & m) {
      using T = std::decay_t<decltype(m)>;
      if constexpr (std::is_same_v<T, Registered>) {
        w.u8(static_cast<std::uint8_t>(CtrlOp::kRegistered));
        w.u32(m.request_id);
        w.u16(static_cast<std::uint16_t>(m.peers.size()));
        for (const auto & ep : m.peers) {
          write_endpoint(w, ep);
        }
      } else if constexpr (std::is_same_v<T, Ack>) {
        w.u8(static_cast<std::uint8_t>(CtrlOp::kAck));
        w.u32(m.request_id);
      } else if constexpr (std::is_same_v<T, PeerChange>) {
        w.u8(static_cast<std::uint8_t>(m.added ? CtrlOp::kPeerAdded : CtrlOp::kPeerRemoved));
        w.u8(static_cast<std::uint8_t>(m.role));
        w.str8(m.topic.str());
        write_endpoint(w, m.endpoint);
      } else if constexpr (std::is_same_v<T, SnapshotRequest>) {
        w.u8(static_cast<std::uint8_t>(CtrlOp::kSnapshotReq));
        w.u32(m.request_id);
      } else if constexpr (std::is_same_v<T, Snapshot>) {
        w.u8(static_cast<std::uint8_t>(CtrlOp::kSnapshot));
        w.u32(m.request_id);
        w.u16(static_cast<std::uint16_t>(m.table.topics.size()));
        for (const auto & [topic, rec] : m.table.topics) {
          w.str8(topic.str());
          write_endpoints(w, rec.publishers);
          write_endpoints(w, rec.subscribers);
        }
      } else {
        w.u8(static_cast<std::uint8_t>(CtrlOp::kError));
        w.u32(m.request_id);
        w.str16(m.message.substr(0, 65535));
      }
    }, c);
  return w.take();
}

std::optional<RegistryCtrl> decode_ctrl(ByteView body)
{
  ByteReader r(body);
  std::uint8_t op = 0;
  if (!r.u8(op)) {
    return std::nullopt;
  }
  switch (static_cast<CtrlOp>(op)) {
    case CtrlOp::kRegistered: {
        Registered m;
        std::uint16_t n = 0;
        if (!r.u32(m.request_id) || !r.u16(n)) {
          return std::nullopt;
        }
        for (std::uint16_t i = 0; i < n; ++i) {
          Endpoint ep;
          if (!read_endpoint(r, ep)) {
            return std::nullopt;
          }
          m.peers.push_back(ep);
        }
        return r.done() ? std::optional<RegistryCtrl>(m) : std::nullopt;
      }
    case CtrlOp::kAck: {
        Ack m;
        if (!r.u32(m.request_id) || !r.done()) {
          return std::nullopt;
        }
        return m;
      }
    case CtrlOp::kPeerAdded:
    case CtrlOp::kPeerRemoved: {
        Role role{};
        std::optional<TopicName> topic;
        Endpoint ep;
        if (!read_role(r, role) || !read_topic(r, topic) || !read_endpoint(r, ep) || !r.done()) {
          return std::nullopt;
        }
        return PeerChange{static_cast<CtrlOp>(op) == CtrlOp::kPeerAdded, role, *topic, ep};
      }
    case CtrlOp::kSnapshotReq: {
        SnapshotRequest m;
        if (!r.u32(m.request_id) || !r.done()) {
          return std::nullopt;
        }
        return m;
      }
    case CtrlOp::kSnapshot: {
        Snapshot m;
        std::uint16_t n = 0;
        if (!r.u32(m.request_id) || !r.u16(n)) {
          return std::nullopt;
        }
        for (std::uint16_t i = 0; i < n; ++i) {
          std::optional<TopicName> topic;
          registry::TopicRecord rec;
          if (!read_topic(r, topic) || !read_endpoints(r, rec.publishers) ||
            !read_endpoints(r, rec.subscribers))
          {
            return std::nullopt;
          }
          m.table.topics.emplace(*topic, std::move(rec));
        }
        return r.done() ? std::optional<RegistryCtrl>(m) : std::nullopt;
      }
    case CtrlOp::kError: {
        RequestError m;
        if (!r.u32(m.request_id) || !r.str16(m.message) || !r.done()) {
          return std::nullopt;
        }
        return m;
      }
  }
  return std::nullopt;
}

Bytes encode_ping(const Ping & p)
{
  ByteWriter w;
  w.u64(p.nonce);
  w.u64(p.sent_ns);
  return w.take();
}

std::optional<Ping> decode_ping(ByteView body)
{
  ByteReader r(body);
  Ping p;
  if (!r.u64(p.nonce) || !r.u64(p.sent_ns) || !r.done()) {
    return std::nullopt;
  }
  return p;
}

}  // namespace fog::proto
