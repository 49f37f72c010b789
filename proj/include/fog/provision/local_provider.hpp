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

#ifndef FOG__PROVISION__LOCAL_PROVIDER_HPP_
#define FOG__PROVISION__LOCAL_PROVIDER_HPP_

#include <mutex>
#include <optional>

#include "fog/provision/provider.hpp"

namespace fog::provision
{

struct LocalProviderOptions
{
  /// Sandboxes live under <sandbox_root>/fog-<deployment>/<instance>.
  std::filesystem::path sandbox_root{};
  std::filesystem::path tools_dir{FOG_TOOLS_DIR};
  std::string host{"127.0.0.1"};
  std::uint16_t first_port{20000};
  std::uint16_t last_port{32000};
  std::chrono::milliseconds ready_timeout{std::chrono::seconds(5)};

  /// FOG_SANDBOX_DIR, else the system temporary directory.
  static LocalProviderOptions from_env();
};

/// Instances are process groups led by a fog-instance supervisor, each rooted
/// in its own sandbox directory on loopback.
class LocalProvider : public Provider
{
public:
  explicit LocalProvider(LocalProviderOptions options = LocalProviderOptions::from_env());
  ~LocalProvider() override;

  std::string kind() const override {return "local";}
  InstanceHandle create_instance(const std::string & deployment_id, const std::string & name,
    const manifest::MachineSpec & machine, const SecurityRules & rules) override;
  net::Address address(const InstanceHandle & h) override;
  void push_files(const InstanceHandle & h, const std::vector<std::filesystem::path> & local,
    const std::string & remote_root) override;
  ExecResult exec(const InstanceHandle & h, const ExecRequest & request) override;
  void terminate(const InstanceHandle & h) override;
  std::vector<InstanceHandle> list_instances(const std::string & deployment_id) override;

  std::filesystem::path deployment_root(const std::string & deployment_id) const;
  std::filesystem::path instance_root(const InstanceHandle & h) const;
  /// Process group id of a live instance.
  std::optional<int> process_group(const InstanceHandle & h) const;
  /// Environment exported to every process of the instance.
  std::map<std::string, std::string> instance_env(const InstanceHandle & h) const;

  const LocalProviderOptions & options() const {return options_;}

private:
  struct Info;

  std::optional<Info> read_info(const InstanceHandle & h) const;
  Info require(const InstanceHandle & h) const;
  std::uint16_t pick_block(const std::set<std::uint16_t> & skip) const;
  void reap();

  LocalProviderOptions options_;
  mutable std::mutex mu_;
  std::vector<int> children_;
};

}  // namespace fog::provision

#endif  // FOG__PROVISION__LOCAL_PROVIDER_HPP_
