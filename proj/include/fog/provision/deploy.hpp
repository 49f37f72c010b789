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

#ifndef FOG__PROVISION__DEPLOY_HPP_
#define FOG__PROVISION__DEPLOY_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fog/manifest/manifest.hpp"
#include "fog/provision/local_provider.hpp"
#include "fog/provision/provider.hpp"

namespace fog::provision
{

enum class DeployStatus
{
  kProvisioning,
  kPushing,
  kSetup,
  kNetworking,
  kRunning,
  kFailed,
  kTornDown,
};

std::string_view to_string(DeployStatus s);
std::optional<DeployStatus> parse_status(std::string_view text);

inline constexpr int kStepCount = 5;

/// One plan step. Index 1..5 for cloud groups; 0 for the edge launch.
struct PlanStep
{
  int index{0};
  std::string group;
  std::string action;

  bool operator==(const PlanStep &) const = default;
};

struct GroupPlan
{
  manifest::CloudGroupSpec spec;
  manifest::MachineSpec machine;
  std::vector<manifest::NodeSpec> nodes;
  std::vector<std::string> packages;
};

struct DeploymentPlan
{
  manifest::LaunchManifest manifest;
  std::vector<GroupPlan> groups;
  std::vector<manifest::NodeSpec> edge_nodes;
  std::vector<std::string> edge_packages;
  std::vector<PlanStep> steps;
};

/// Five ordered steps per cloud group plus an edge launch step when there are
/// local nodes. Throws Error(kInvalidManifest) for machine types missing from
/// the catalog or groups too large for one instance.
DeploymentPlan plan_deployment(const manifest::LaunchManifest & m, const manifest::Catalog & catalog);

struct StepEvent
{
  int index{0};
  std::string group;
  std::string action;
  bool ok{true};
  std::string detail;

  /// "[k/5] <group> <action> ok|fail", or "edge launch ok|fail".
  std::string line() const;
};

struct ProcessRecord
{
  std::string name;
  int pid{0};

  bool operator==(const ProcessRecord &) const = default;
};

struct GroupRecord
{
  std::string name;
  std::string instance_type;
  std::optional<InstanceHandle> instance;
  std::optional<net::Address> base;
  manifest::NetworkMode network{manifest::NetworkMode::kDirect};
  std::string secret_id;
  /// Registry the group's nodes joined.
  std::optional<net::Address> registry;
  /// Proxy channel address (proxy mode).
  std::optional<net::Address> channel;
  /// Status file of the edge half of the proxy pair.
  std::string edge_proxy_status;
  std::vector<ProcessRecord> processes;
  std::vector<std::string> nodes;

  bool operator==(const GroupRecord &) const = default;
};

struct DeploymentRecord
{
  std::string id;
  std::string provider;
  DeployStatus status{DeployStatus::kProvisioning};
  std::vector<DeployStatus> history;
  int failed_step{0};
  std::string failed_group;
  std::string error;
  bool trace{false};
  std::optional<InstanceHandle> edge;
  std::optional<net::Address> edge_registry;
  std::vector<ProcessRecord> edge_processes;
  std::vector<std::string> edge_nodes;
  std::map<std::string, GroupRecord> groups;
  std::vector<std::string> credential_files;
  bool credentials_revoked{false};
  std::vector<std::string> teardown_errors;

  bool operator==(const DeploymentRecord &) const = default;
};

/// Records persist in the manifest key = value format.
std::string render_record(const DeploymentRecord & r);
DeploymentRecord parse_record(std::string_view text);

struct DeployOptions
{
  /// Empty: a random 8-hex id.
  std::string deployment_id;
  /// Stamp trace hops on every node.
  bool trace{false};
  /// Wait for the proxy channel before reporting networking ok.
  bool verify_channel{true};
  /// Run a network monitor on the edge for directly connected groups.
  bool netmon{true};
  /// Existing edge registry; when absent the deployment starts one.
  std::optional<net::Address> edge_master;
  manifest::MachineSpec edge_machine{"edge", 1, false, 0, 1.0};
  std::filesystem::path base_dir{"."};
  std::vector<std::filesystem::path> package_path{std::filesystem::path(FOG_SHARE_DIR) / "packages"};
  std::vector<std::filesystem::path> image_path{std::filesystem::path(FOG_SHARE_DIR) / "images"};
  std::filesystem::path tools_dir{FOG_TOOLS_DIR};
  std::chrono::milliseconds network_timeout{std::chrono::seconds(10)};
  std::chrono::milliseconds proxy_poll{500};
  std::chrono::milliseconds monitor_interval{1000};
  std::function<void(const StepEvent &)> on_step;
  std::function<void(DeployStatus)> on_status;
};

/// Runs the plan. Groups run steps 1-3 concurrently; networking and launch
/// follow group by group. A failing step rolls everything back and returns a
/// FAILED record. Throws Error(kAlreadyDeployed) when the id is in use.
DeploymentRecord deploy(const DeploymentPlan & plan, Provider & cloud, LocalProvider & edge,
  const DeployOptions & options = {});

/// Stops every process, terminates every instance and revokes credentials.
/// Idempotent; failures are collected in `teardown_errors`.
DeploymentRecord teardown(DeploymentRecord record, Provider & cloud, LocalProvider & edge);

}  // namespace fog::provision

#endif  // FOG__PROVISION__DEPLOY_HPP_
