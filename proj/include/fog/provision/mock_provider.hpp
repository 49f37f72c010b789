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

#ifndef FOG__PROVISION__MOCK_PROVIDER_HPP_
#define FOG__PROVISION__MOCK_PROVIDER_HPP_

#include <mutex>
#include <optional>

#include "fog/provision/provider.hpp"

namespace fog::provision
{

/// Canned exec answers, matched by request label and then by argv[0]'s
/// file name. Unmatched requests succeed with empty output.
struct MockScript
{
  std::map<std::string, ExecResult> by_label;
  std::map<std::string, ExecResult> by_program;
  /// create_instance throws for these instance names.
  std::set<std::string> refuse_instances;
};

struct MockCall
{
  InstanceHandle instance;
  std::string op;
  std::vector<std::string> args;
  std::string label;
};

/// Remote provider stand-in: no processes, no network. Instances live in
/// memory and, when a state file is given, persist across processes.
class MockRemoteProvider : public Provider
{
public:
  explicit MockRemoteProvider(MockScript script = {},
    std::optional<std::filesystem::path> state_file = std::nullopt);

  std::string kind() const override {return "mock-remote";}
  InstanceHandle create_instance(const std::string & deployment_id, const std::string & name,
    const manifest::MachineSpec & machine, const SecurityRules & rules) override;
  net::Address address(const InstanceHandle & h) override;
  void push_files(const InstanceHandle & h, const std::vector<std::filesystem::path> & local,
    const std::string & remote_root) override;
  ExecResult exec(const InstanceHandle & h, const ExecRequest & request) override;
  void terminate(const InstanceHandle & h) override;
  std::vector<InstanceHandle> list_instances(const std::string & deployment_id) override;

  std::vector<MockCall> calls() const;

private:
  struct Instance
  {
    InstanceHandle handle;
    net::Address base;
    std::string instance_type;
  };

  void load();
  void save() const;
  const Instance & require(const InstanceHandle & h) const;

  MockScript script_;
  std::optional<std::filesystem::path> state_file_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, Instance> instances_;
  std::vector<MockCall> calls_;
  int next_host_{1};
  int next_pid_{1000};
};

}  // namespace fog::provision

#endif  // FOG__PROVISION__MOCK_PROVIDER_HPP_
