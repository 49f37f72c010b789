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

#include "fog/provision/provider.hpp"

#include <dirent.h>

#include <fstream>
#include <sstream>

namespace fog::provision
{

SecurityRules SecurityRules::for_nodes(int node_ports, std::set<std::string> peers)
{
  SecurityRules r;
  r.allowed_ports = {kRegistryOffset, kProxyOffset, kAgentOffset};
  for (int i = 0; i < node_ports && kFirstNodeOffset + i < kPortBlock; ++i) {
    r.allowed_ports.insert(kFirstNodeOffset + i);
  }
  r.peer_allowlist = std::move(peers);
  return r;
}

SecurityRules SecurityRules::open(std::set<std::string> peers)
{
  return for_nodes(kPortBlock, std::move(peers));
}

std::pair<int, int> SecurityRules::node_port_range() const
{
  int last = kFirstNodeOffset - 1;
  while (allowed_ports.count(last + 1)) {
    ++last;
  }
  return {kFirstNodeOffset, last};
}

net::Address port_address(const net::Address & base, int offset)
{
  return {base.host, static_cast<std::uint16_t>(base.port + offset)};
}

std::vector<int> tagged_processes(const std::string & deployment_id)
{
  std::vector<int> out;
  const std::string tag = "FOG_DEPLOYMENT=" + deployment_id;
  DIR * d = ::opendir("/proc");
  if (!d) {
    return out;
  }
  while (auto * e = ::readdir(d)) {
    char * end = nullptr;
    long pid = std::strtol(e->d_name, &end, 10);
    if (*end != '\0' || pid <= 0) {
      continue;
    }
    std::ifstream in(std::string("/proc/") + e->d_name + "/environ", std::ios::binary);
    if (!in) {
      continue;
    }
    std::string var;
    while (std::getline(in, var, '\0')) {
      if (var == tag) {
        out.push_back(static_cast<int>(pid));
        break;
      }
    }
  }
  ::closedir(d);
  return out;
}

}  // namespace fog::provision
