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

#include "fog/registry/table.hpp"

namespace fog::registry
{

const char * to_string(Role r)
{
  return r == Role::kPublisher ? "pub" : "sub";
}

bool RegistryTable::add(const TopicName & topic, Role role, const Endpoint & who)
{
  auto & set = topics[topic].role(role);
  auto it = set.find(who.node_id);
  if (it != set.end()) {
    it->second = who;
    return false;
  }
  set.emplace(who.node_id, who);
  return true;
}

bool RegistryTable::remove(const TopicName & topic, Role role, const NodeId & id)
{
  auto it = topics.find(topic);
  if (it == topics.end()) {
    return false;
  }
  bool erased = it->second.role(role).erase(id) > 0;
  if (it->second.empty()) {
    topics.erase(it);
  }
  return erased;
}

std::vector<RegistryTable::Removal> RegistryTable::remove_node(const NodeId & id)
{
  std::vector<Removal> removed;
  for (auto it = topics.begin(); it != topics.end(); ) {
    for (Role role : {Role::kPublisher, Role::kSubscriber}) {
      auto & set = it->second.role(role);
      auto found = set.find(id);
      if (found != set.end()) {
        removed.push_back({it->first, role, found->second});
        set.erase(found);
      }
    }
    if (it->second.empty()) {
      it = topics.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

std::vector<Endpoint> RegistryTable::peers(const TopicName & topic, Role role) const
{
  std::vector<Endpoint> out;
  auto it = topics.find(topic);
  if (it == topics.end()) {
    return out;
  }
  for (const auto & [id, ep] : it->second.role(role)) {
    out.push_back(ep);
  }
  return out;
}

bool RegistryTable::has(const TopicName & topic, Role role) const
{
  auto it = topics.find(topic);
  return it != topics.end() && !it->second.role(role).empty();
}

RegistryTable RegistryTable::without_node(const NodeId & id) const
{
  RegistryTable copy = *this;
  copy.remove_node(id);
  return copy;
}

}  // namespace fog::registry
