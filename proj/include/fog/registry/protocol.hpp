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

#ifndef FOG__REGISTRY__PROTOCOL_HPP_
#define FOG__REGISTRY__PROTOCOL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fog/common/bytes.hpp"
#include "fog/registry/table.hpp"
#include "fog/wire/codec.hpp"

// Control-record layouts spoken between nodes and the registry, and between
// a publisher and the subscribers it connects to. All integers big-endian.
//
//   HELLO  : hello_type:1 | ...            (see HelloKind)
//   SUB    : request_id:4 | role:1 | topic:str8       register
//   UNSUB  : request_id:4 | role:1 | topic:str8       unregister
//   CTRL   : op:1 | ...                    (see CtrlOp)
//   PING/PONG : nonce:8 | sent_ns:8
//
// Endpoint: node_name:str8 | address:str8 | node_id:16

namespace fog::proto
{

enum class HelloKind : std::uint8_t
{
  kRegistryClient = 1,  // endpoint
  kPeer = 2,            // topic:str8 | endpoint of the publishing node
};

enum class CtrlOp : std::uint8_t
{
  kRegistered = 1,    // request_id:4 | count:2 | endpoint*
  kAck = 2,           // request_id:4
  kPeerAdded = 3,     // role:1 | topic:str8 | endpoint
  kPeerRemoved = 4,   // role:1 | topic:str8 | endpoint
  kSnapshotReq = 5,   // request_id:4
  kSnapshot = 6,      // request_id:4 | topics:2 | (topic:str8 | pubs:2 | ep* | subs:2 | ep*)*
  kError = 7,         // request_id:4 | message:str16
};

struct RegistryHello
{
  registry::Endpoint endpoint;
};

struct PeerHello
{
  TopicName topic;
  registry::Endpoint publisher;
};

struct Registration
{
  std::uint32_t request_id{0};
  registry::Role role{registry::Role::kPublisher};
  std::string topic;  // validated by the receiver
};

struct Registered
{
  std::uint32_t request_id{0};
  std::vector<registry::Endpoint> peers;
};

struct Ack
{
  std::uint32_t request_id{0};
};

struct PeerChange
{
  bool added{true};
  registry::Role role{registry::Role::kPublisher};
  TopicName topic;
  registry::Endpoint endpoint;
};

struct SnapshotRequest
{
  std::uint32_t request_id{0};
};

struct Snapshot
{
  std::uint32_t request_id{0};
  registry::RegistryTable table;
};

struct RequestError
{
  std::uint32_t request_id{0};
  std::string message;
};

using RegistryCtrl =
  std::variant<Registered, Ack, PeerChange, SnapshotRequest, Snapshot, RequestError>;

struct Ping
{
  std::uint64_t nonce{0};
  std::uint64_t sent_ns{0};
};

Bytes encode_hello(const RegistryHello & h);
Bytes encode_hello(const PeerHello & h);
std::optional<std::variant<RegistryHello, PeerHello>> decode_hello(ByteView body);

Bytes encode_registration(const Registration & r);
std::optional<Registration> decode_registration(ByteView body);

Bytes encode_ctrl(const RegistryCtrl & c);
std::optional<RegistryCtrl> decode_ctrl(ByteView body);

Bytes encode_ping(const Ping & p);
std::optional<Ping> decode_ping(ByteView body);

void write_endpoint(ByteWriter & w, const registry::Endpoint & ep);
bool read_endpoint(ByteReader & r, registry::Endpoint & ep);

}  // namespace fog::proto

#endif  // FOG__REGISTRY__PROTOCOL_HPP_
