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

#ifndef FOG__PROVISION__PROVIDER_HPP_
#define FOG__PROVISION__PROVIDER_HPP_

#include <chrono>
#include <compare>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fog/manifest/manifest.hpp"
#include "fog/net/socket.hpp"

namespace fog::provision
{

/// Every instance owns a block of consecutive ports starting at its base
/// port. Security rules name ports by their offset in that block.
inline constexpr int kPortBlock = 32;
inline constexpr int kRegistryOffset = 0;
inline constexpr int kProxyOffset = 1;
inline constexpr int kAgentOffset = 2;
inline constexpr int kFirstNodeOffset = 3;

struct SecurityRules
{
  /// Offsets into the instance's port block that accept connections.
  std::set<int> allowed_ports;
  /// Peer IPs allowed to connect to the open ports.
  std::set<std::string> peer_allowlist;

  /// Registry, proxy, agent and `node_ports` node ports, open to `peers`.
  static SecurityRules for_nodes(int node_ports, std::set<std::string> peers = {"127.0.0.1"});
  /// Every port of the block open.
  static SecurityRules open(std::set<std::string> peers = {"127.0.0.1"});

  /// Contiguous node port offsets [first, last] derived from the allowed set.
  std::pair<int, int> node_port_range() const;
};

struct InstanceHandle
{
  std::string deployment_id;
  std::string name;
  std::string id;

  auto operator<=>(const InstanceHandle &) const = default;
};

struct ExecRequest
{
  std::vector<std::string> argv;
  std::map<std::string, std::string> env;
  /// Detached commands keep running; output goes to logs/<log_name>.log.
  bool detach{false};
  std::string log_name;
  /// Deployment step label (setup, networking, launch); shows in errors.
  std::string label;
  std::chrono::milliseconds timeout{std::chrono::seconds(30)};
};

struct ExecResult
{
  int status{0};
  std::string output;
  int pid{0};
};

/// The narrow interface a compute provider must supply.
class Provider
{
public:
  virtual ~Provider() = default;

  virtual std::string kind() const = 0;

  /// Returns a live instance or throws; never leaves a half-created instance
  /// that list_instances would miss.
  virtual InstanceHandle create_instance(const std::string & deployment_id, const std::string & name,
    const manifest::MachineSpec & machine, const SecurityRules & rules) = 0;
  /// Host and base port of the instance's port block.
  virtual net::Address address(const InstanceHandle & h) = 0;
  /// Copies files or directory trees under `remote_root` of the instance.
  virtual void push_files(const InstanceHandle & h, const std::vector<std::filesystem::path> & local,
    const std::string & remote_root) = 0;
  virtual ExecResult exec(const InstanceHandle & h, const ExecRequest & request) = 0;
  /// Idempotent.
  virtual void terminate(const InstanceHandle & h) = 0;
  virtual std::vector<InstanceHandle> list_instances(const std::string & deployment_id) = 0;
};

/// Address of the port at `offset` in the block starting at `base`.
net::Address port_address(const net::Address & base, int offset);

/// Process ids whose environment carries FOG_DEPLOYMENT=<id>.
std::vector<int> tagged_processes(const std::string & deployment_id);

}  // namespace fog::provision

#endif  // FOG__PROVISION__PROVIDER_HPP_
