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

#ifndef FOG__REGISTRY__TABLE_HPP_
#define FOG__REGISTRY__TABLE_HPP_

#include <map>
#include <string>
#include <vector>

#include "fog/common/ids.hpp"
#include "fog/wire/topic.hpp"

namespace fog::registry
{

enum class Role : std::uint8_t
{
  kPublisher = 0,
  kSubscriber = 1,
};

inline Role opposite(Role r) {return r == Role::kPublisher ? Role::kSubscriber : Role::kPublisher;}
const char * to_string(Role r);

/// A node as seen by the registry: where it listens and who it is.
struct Endpoint
{
  std::string node_name;
  std::string address;
  NodeId node_id;

  bool operator==(const Endpoint &) const = default;
};

struct TopicRecord
{
  // Keyed by node id so an endpoint appears at most once per role.
  std::map<NodeId, Endpoint> publishers;
  std::map<NodeId, Endpoint> subscribers;

  bool empty() const {return publishers.empty() && subscribers.empty();}
  std::map<NodeId, Endpoint> & role(Role r) {return r == Role::kPublisher ? publishers : subscribers;}
  const std::map<NodeId, Endpoint> & role(Role r) const
  {
    return r == Role::kPublisher ? publishers : subscribers;
  }

  bool operator==(const TopicRecord &) const = default;
};

/// Per-topic publisher and subscriber sets. Topics with no endpoints are absent.
struct RegistryTable
{
  std::map<TopicName, TopicRecord> topics;

  /// Inserts `who`; false when it was already present in that role.
  bool add(const TopicName & topic, Role role, const Endpoint & who);
  /// Removes the endpoint; false when it was absent.
  bool remove(const TopicName & topic, Role role, const NodeId & id);

  struct Removal
  {
    TopicName topic;
    Role role;
    Endpoint endpoint;
  };
  /// Removes every entry owned by `id`.
  std::vector<Removal> remove_node(const NodeId & id);

  std::vector<Endpoint> peers(const TopicName & topic, Role role) const;
  bool has(const TopicName & topic, Role role) const;
  /// Copy without the entries owned by `id` (used to hide a proxy's own registrations).
  RegistryTable without_node(const NodeId & id) const;

  bool operator==(const RegistryTable &) const = default;
};

}  // namespace fog::registry

#endif  // FOG__REGISTRY__TABLE_HPP_
