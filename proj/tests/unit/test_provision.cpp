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

#include <gtest/gtest.h>
#include <signal.h>

#include <fstream>
#include <set>

#include "fog/common/error.hpp"
#include "fog/common/ids.hpp"
#include "fog/net/socket.hpp"
#include "fog/provision/deploy.hpp"
#include "fog/provision/local_provider.hpp"
#include "fog/provision/mock_provider.hpp"
#include "fog/registry/registry.hpp"
#include "support/faulty_provider.hpp"
#include "support/wait.hpp"

namespace fog::provision
{
namespace
{

namespace fs = std::filesystem;
using namespace std::chrono_literals;
using testing::wait_until;

const manifest::MachineSpec kBig{"c5.24xlarge", 8, false, 0, 0.1};

class ProvisionTest : public ::testing::Test
{
protected:
  void SetUp() override
  {
    root_ = fs::temp_directory_path() / ("fogtest-" + random_hex(8));
    LocalProviderOptions o;
    o.sandbox_root = root_;
    local_ = std::make_unique<LocalProvider>(o);
  }

  void TearDown() override
  {
    for (const auto & id : deployments_) {
      for (const auto & h : local_->list_instances(id)) {
        local_->terminate(h);
      }
    }
    std::error_code ec;
    fs::remove_all(root_, ec);
  }

  std::string new_id()
  {
    deployments_.push_back(random_hex(8));
    return deployments_.back();
  }

  static bool alive(int pid)
  {
    std::ifstream in("/proc/" + std::to_string(pid) + "/stat");
    std::string s;
    std::getline(in, s);
    auto rp = s.rfind(')');
    return rp != std::string::npos && s[rp + 2] != 'Z';
  }

  static std::set<std::uint16_t> block_ports(const net::Address & base)
  {
    std::set<std::uint16_t> out;
    auto listening = net::listening_ports();
    for (int p = base.port; p < base.port + kPortBlock; ++p) {
      if (listening.count(static_cast<std::uint16_t>(p))) {
        out.insert(static_cast<std::uint16_t>(p));
      }
    }
    return out;
  }

  fs::path root_;
  std::unique_ptr<LocalProvider> local_;
  std::vector<std::string> deployments_;
};

TEST_F(ProvisionTest, ExecSeesMachineEnvironment)
{
  auto id = new_id();
  auto h = local_->create_instance(id, "big", kBig, SecurityRules::for_nodes(4));
  ExecRequest req;
  req.argv = {"env"};
  auto r = local_->exec(h, req);
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.output.find("FOG_WORKERS=8"), std::string::npos);
  EXPECT_NE(r.output.find("FOG_GPU=0"), std::string::npos);
  EXPECT_NE(r.output.find("FOG_DEPLOYMENT=" + id), std::string::npos);
  ASSERT_EQ(local_->list_instances(id).size(), 1u);
  EXPECT_EQ(local_->list_instances(id)[0], h);
}

TEST_F(ProvisionTest, ExecReportsExitStatus)
{
  auto h = local_->create_instance(new_id(), "a", kBig, SecurityRules::for_nodes(1));
  ExecRequest req;
  req.argv = {"/bin/sh", "-c", "echo out; exit 7"};
  auto r = local_->exec(h, req);
  EXPECT_EQ(r.status, 7);
  EXPECT_EQ(r.output, "out\n");
  req.argv = {"/no/such/program"};
  EXPECT_NE(local_->exec(h, req).status, 0);
}

TEST_F(ProvisionTest, ClosedPortRefusesConnections)
{
  auto h = local_->create_instance(new_id(), "a", kBig, SecurityRules::for_nodes(2));
  auto base = local_->address(h);
  auto closed = port_address(base, kPortBlock - 1);
  bool refused = false;
  try {
    auto s = net::connect_tcp(closed, 1000ms);
    std::uint8_t b;
    refused = s.wait_readable(1000ms) && s.recv_some(&b, 1) == 0;
  } catch (const Error &) {
    refused = true;
  }
  EXPECT_TRUE(refused);

  // The agent port stays open and answers pings.
  net::FrameConnection agent(net::connect_tcp(port_address(base, kAgentOffset), 1000ms));
  Bytes body{1, 2, 3};
  agent.write_control(wire::FrameKind::kPing, ByteView(body));
  auto f = agent.read(2000ms);
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(f->kind, wire::FrameKind::kPong);
  EXPECT_EQ(f->control().bytes, body);
}

TEST_F(ProvisionTest, TerminateStopsWholeGroupWithinTwoSeconds)
{
  auto id = new_id();
  auto h = local_->create_instance(id, "a", kBig, SecurityRules::for_nodes(1));
  ExecRequest req;
  req.argv = {"/bin/sh", "-c", "sleep 300"};
  req.detach = true;
  req.log_name = "sleeper";
  auto r = local_->exec(h, req);
  ASSERT_EQ(r.status, 0);
  ASSERT_GT(r.pid, 0);
  auto pgid = local_->process_group(h);
  ASSERT_TRUE(pgid.has_value());
  EXPECT_FALSE(tagged_processes(id).empty());

  auto t0 = std::chrono::steady_clock::now();
  local_->terminate(h);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 2s);
  EXPECT_FALSE(alive(r.pid));
  EXPECT_FALSE(alive(*pgid));
  EXPECT_TRUE(tagged_processes(id).empty());
  EXPECT_TRUE(local_->list_instances(id).empty());
  EXPECT_NO_THROW(local_->terminate(h));
}

TEST_F(ProvisionTest, PushCopiesTreesInsideSandbox)
{
  auto h = local_->create_instance(new_id(), "a", kBig, SecurityRules::for_nodes(1));
  auto pkg = fs::path(FOG_SHARE_DIR) / "packages" / "fog_bench";
  local_->push_files(h, {pkg}, "code");
  EXPECT_TRUE(fs::exists(local_->instance_root(h) / "code" / "fog_bench" / "talker"));
  EXPECT_THROW(local_->push_files(h, {pkg}, "../escape"), Error);
  EXPECT_THROW(local_->push_files(h, {root_ / "missing"}, "code"), Error);
}

TEST_F(ProvisionTest, StartupDelayApplies)
{
  manifest::MachineSpec slow{"slow", 1, false, 300, 1.0};
  auto t0 = std::chrono::steady_clock::now();
  local_->create_instance(new_id(), "a", slow, SecurityRules::for_nodes(1));
  EXPECT_GE(std::chrono::steady_clock::now() - t0, 300ms);
}

// ---------------------------------------------------------------------------
// Planning

manifest::LaunchManifest two_cloud_nodes(const std::string & extra = "", const std::string & network = "direct")
{
  return manifest::parse_manifest(
    "[cloud worker]\ninstance_type = c5.24xlarge\nnetwork = " + network + "\n" + extra + "\n"
    "[node listener]\npackage = fog_bench\nexec = listener\nplacement = cloud:worker\n"
    "[node talker]\npackage = fog_bench\nexec = talker\nargs = --rate, 5\nplacement = cloud:worker\n");
}

TEST(Plan, EdgeOnlyManifestHasOnlyEdgeLaunch)
{
  auto m = manifest::parse_manifest("[node a]\npackage = fog_bench\nexec = talker\nplacement = edge\n");
  auto plan = plan_deployment(m, manifest::builtin_catalog());
  ASSERT_EQ(plan.steps.size(), 1u);
  EXPECT_EQ(plan.steps[0], (PlanStep{0, "edge", "edge launch"}));
}

TEST(Plan, CloudGroupHasFiveOrderedSteps)
{
  auto plan = plan_deployment(two_cloud_nodes("setup_script = init.bash"), manifest::builtin_catalog());
  std::vector<PlanStep> expect{{1, "worker", "provision"}, {2, "worker", "push"},
    {3, "worker", "setup"}, {4, "worker", "networking"}, {5, "worker", "launch"}};
  EXPECT_EQ(plan.steps, expect);
  ASSERT_EQ(plan.groups.size(), 1u);
  EXPECT_EQ(plan.groups[0].machine.worker_count, 8);
  EXPECT_EQ(plan.groups[0].packages, std::vector<std::string>{"fog_bench"});
}

TEST(Plan, ImageGroupPullsAndRunsContainer)
{
  auto m = manifest::parse_manifest(
    "[cloud grasp]\nimage = dexnet:gpu\ninstance_type = g4dn.xlarge\n[node dexnet]\nplacement = cloud:grasp\n");
  auto plan = plan_deployment(m, manifest::builtin_catalog());
  ASSERT_EQ(plan.steps.size(), 5u);
  EXPECT_EQ(plan.steps[1].action, "pull image");
  EXPECT_EQ(plan.steps[4].action, "run container");
}

TEST(Plan, UnknownMachineIsInvalid)
{
  auto m = manifest::parse_manifest(
    "[cloud g]\ninstance_type = z9.huge\n[node a]\npackage = p\nexec = e\nplacement = cloud:g\n");
  try {
    plan_deployment(m, manifest::builtin_catalog());
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidManifest);
  }
}

TEST(Record, RenderParseRoundTrip)
{
  DeploymentRecord r;
  r.id = "0a1b2c3d";
  r.provider = "local";
  r.status = DeployStatus::kRunning;
  r.history = {DeployStatus::kProvisioning, DeployStatus::kPushing, DeployStatus::kSetup,
    DeployStatus::kNetworking, DeployStatus::kRunning};
  r.trace = true;
  r.edge = InstanceHandle{r.id, "edge", "deadbeef"};
  r.edge_registry = net::Address{"127.0.0.1", 20000};
  r.edge_processes = {{"registry", 10}, {"proxy-g", 11}};
  r.edge_nodes = {"talker"};
  r.credential_files = {"/tmp/x/credentials/g/credentials.secret"};
  GroupRecord g;
  g.name = "g";
  g.instance_type = "t2.micro";
  g.instance = InstanceHandle{r.id, "g", "cafe0001"};
  g.base = net::Address{"127.0.0.1", 20032};
  g.network = manifest::NetworkMode::kProxy;
  g.secret_id = "0011223344556677";
  g.registry = net::Address{"127.0.0.1", 20032};
  g.channel = net::Address{"127.0.0.1", 20033};
  g.edge_proxy_status = "/tmp/x/edge/logs/proxy-g.status";
  g.processes = {{"registry", 20}, {"listener", 21}};
  g.nodes = {"listener"};
  r.groups["g"] = g;
  EXPECT_EQ(parse_record(render_record(r)), r);
}

// ---------------------------------------------------------------------------
// Deployment

class DeployTest : public ProvisionTest
{
protected:
  DeployOptions options(const std::string & id)
  {
    DeployOptions o;
    o.deployment_id = id;
    o.base_dir = FOG_SHARE_DIR "/examples";
    o.on_step = [this](const StepEvent & e) {
        std::lock_guard<std::mutex> lock(mu_);
        lines_.push_back(e.line());
      };
    o.on_status = [this](DeployStatus s) {
        std::lock_guard<std::mutex> lock(mu_);
        statuses_.push_back(s);
      };
    return o;
  }

  void expect_clean(const std::string & id, Provider & cloud)
  {
    EXPECT_TRUE(cloud.list_instances(id).empty());
    EXPECT_TRUE(local_->list_instances(id).empty());
    EXPECT_TRUE(wait_until([&] {return tagged_processes(id).empty();}, 2s));
    EXPECT_FALSE(fs::exists(local_->deployment_root(id)));
  }

  void expect_status_prefix()
  {
    std::vector<DeployStatus> order{DeployStatus::kProvisioning, DeployStatus::kPushing,
      DeployStatus::kSetup, DeployStatus::kNetworking, DeployStatus::kRunning};
    std::vector<DeployStatus> seen;
    for (auto s : statuses_) {
      if (s != DeployStatus::kFailed) {
        seen.push_back(s);
      }
    }
    ASSERT_LE(seen.size(), order.size());
    for (std::size_t i = 0; i < seen.size(); ++i) {
      EXPECT_EQ(seen[i], order[i]);
    }
  }

  std::mutex mu_;
  std::vector<std::string> lines_;
  std::vector<DeployStatus> statuses_;
};

TEST_F(DeployTest, HappyPathRunsBothCloudNodes)
{
  auto id = new_id();
  auto plan = plan_deployment(two_cloud_nodes("setup_script = init.bash"), manifest::builtin_catalog());
  auto listening_before = net::listening_ports();
  auto rec = deploy(plan, *local_, *local_, options(id));
  ASSERT_EQ(rec.status, DeployStatus::kRunning) << rec.error;
  EXPECT_EQ(rec.history.back(), DeployStatus::kRunning);
  expect_status_prefix();

  // Edge instance plus one cloud instance.
  auto instances = local_->list_instances(id);
  ASSERT_EQ(instances.size(), 2u);
  const auto & g = rec.groups.at("worker");
  ASSERT_TRUE(g.instance.has_value());
  EXPECT_EQ(g.processes.size(), 2u);
  for (const auto & p : g.processes) {
    EXPECT_TRUE(alive(p.pid)) << p.name;
  }
  EXPECT_EQ(g.secret_id.size(), 16u);
  for (const char * l : {"[1/5] worker provision ok", "[2/5] worker push ok", "[3/5] worker setup ok",
      "[4/5] worker networking ok", "[5/5] worker launch ok"})
  {
    EXPECT_NE(std::find(lines_.begin(), lines_.end(), l), lines_.end()) << l;
  }
  // Both nodes joined the edge registry.
  ASSERT_TRUE(wait_until([&] {
      auto t = registry::query_snapshot(*rec.edge_registry);
      auto it = t.topics.find(TopicName("/chatter"));
      return it != t.topics.end() && it->second.publishers.size() == 1 &&
      it->second.subscribers.size() == 1;
    }, 5s));

  auto base = *g.base;
  EXPECT_FALSE(block_ports(base).empty());
  auto torn = teardown(rec, *local_, *local_);
  EXPECT_EQ(torn.status, DeployStatus::kTornDown);
  EXPECT_TRUE(torn.credentials_revoked);
  EXPECT_TRUE(torn.teardown_errors.empty());
  expect_clean(id, *local_);
  EXPECT_TRUE(block_ports(base).empty());
  for (const auto & p : g.processes) {
    EXPECT_FALSE(alive(p.pid));
  }

  auto again = teardown(torn, *local_, *local_);
  EXPECT_EQ(again, torn);
}

TEST_F(DeployTest, RunningIdCannotBeDeployedAgain)
{
  auto id = new_id();
  auto plan = plan_deployment(two_cloud_nodes(), manifest::builtin_catalog());
  auto rec = deploy(plan, *local_, *local_, options(id));
  ASSERT_EQ(rec.status, DeployStatus::kRunning) << rec.error;
  auto before = local_->list_instances(id);
  try {
    deploy(plan, *local_, *local_, options(id));
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), ErrorCode::kAlreadyDeployed);
  }
  EXPECT_EQ(local_->list_instances(id), before);
  teardown(rec, *local_, *local_);
  expect_clean(id, *local_);
}

TEST_F(DeployTest, FailingSetupScriptRollsBackAtStepThree)
{
  auto id = new_id();
  auto script = root_ / "bad.sh";
  fs::create_directories(root_);
  std::ofstream(script) << "echo broken >&2\nexit 3\n";
  auto plan = plan_deployment(two_cloud_nodes("setup_script = " + script.string()),
      manifest::builtin_catalog());
  auto rec = deploy(plan, *local_, *local_, options(id));
  EXPECT_EQ(rec.status, DeployStatus::kFailed);
  EXPECT_EQ(rec.failed_step, 3);
  EXPECT_NE(rec.error.find("broken"), std::string::npos);
  EXPECT_NE(std::find(lines_.begin(), lines_.end(), "[3/5] worker setup fail"), lines_.end());
  expect_clean(id, *local_);
  auto torn = teardown(rec, *local_, *local_);
  EXPECT_EQ(torn.status, DeployStatus::kTornDown);
  expect_clean(id, *local_);
}

TEST_F(DeployTest, FaultAtEveryStepLeavesNothingBehind)
{
  for (const char * network : {"direct", "proxy"}) {
    for (int step = 1; step <= kStepCount; ++step) {
      SCOPED_TRACE(std::string(network) + " step " + std::to_string(step));
      lines_.clear();
      statuses_.clear();
      auto id = new_id();
      testing::FaultyProvider faulty(*local_, step);
      auto m = two_cloud_nodes("setup_script = init.bash", network);
      m.cloud_groups["spare"] = m.cloud_groups.at("worker");
      m.cloud_groups["spare"].name = "spare";
      m.nodes.push_back(manifest::NodeSpec{"extra", "fog_bench", "listener", {}, manifest::Placement::in("spare"), 0});
      auto plan = plan_deployment(m, manifest::builtin_catalog());
      auto listening_before = net::listening_ports();
      auto rec = deploy(plan, faulty, *local_, options(id));
      EXPECT_TRUE(faulty.tripped());
      EXPECT_EQ(rec.status, DeployStatus::kFailed);
      EXPECT_EQ(rec.failed_step, step);
      expect_status_prefix();
      bool saw_fail = false;
      for (const auto & l : lines_) {
        saw_fail |= l.rfind("[" + std::to_string(step) + "/5]", 0) == 0 &&
          l.size() > 4 && l.substr(l.size() - 4) == "fail";
      }
      EXPECT_TRUE(saw_fail);
      expect_clean(id, *local_);
      auto after = net::listening_ports();
      for (auto p : after) {
        if (p >= 20000 && p <= 32000) {
          EXPECT_TRUE(listening_before.count(p)) << "port " << p << " left open";
        }
      }
      auto torn = teardown(rec, faulty, *local_);
      EXPECT_EQ(torn.status, DeployStatus::kTornDown);
    }
  }
}

TEST_F(DeployTest, ProxyModeEstablishesChannel)
{
  auto id = new_id();
  auto plan = plan_deployment(two_cloud_nodes("", "proxy"), manifest::builtin_catalog());
  auto rec = deploy(plan, *local_, *local_, options(id));
  ASSERT_EQ(rec.status, DeployStatus::kRunning) << rec.error;
  const auto & g = rec.groups.at("worker");
  ASSERT_TRUE(g.registry && g.channel);
  EXPECT_NE(*g.registry, *rec.edge_registry);
  std::ifstream in(g.edge_proxy_status);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("channel = up"), std::string::npos);
  teardown(rec, *local_, *local_);
  expect_clean(id, *local_);
}

TEST_F(DeployTest, TwoGroupTeardownClosesAllPorts)
{
  auto id = new_id();
  auto m = two_cloud_nodes("", "proxy");
  m.cloud_groups["second"] = m.cloud_groups.at("worker");
  m.cloud_groups["second"].name = "second";
  m.nodes.push_back(manifest::NodeSpec{"l2", "fog_bench", "listener", {}, manifest::Placement::in("second"), 0});
  auto rec = deploy(plan_deployment(m, manifest::builtin_catalog()), *local_, *local_, options(id));
  ASSERT_EQ(rec.status, DeployStatus::kRunning) << rec.error;
  std::vector<net::Address> bases{*rec.groups.at("worker").base, *rec.groups.at("second").base,
    local_->address(*rec.edge)};
  for (const auto & b : bases) {
    EXPECT_FALSE(block_ports(b).empty());
  }
  teardown(rec, *local_, *local_);
  expect_clean(id, *local_);
  for (const auto & b : bases) {
    EXPECT_TRUE(block_ports(b).empty()) << b.str();
  }
}

TEST_F(DeployTest, MockRemoteSecretsAreFresh)
{
  MockRemoteProvider mock;
  auto plan = plan_deployment(two_cloud_nodes(), manifest::builtin_catalog());
  registry::RegistryServer edge_registry;
  edge_registry.start();
  std::set<std::string> ids;
  for (int i = 0; i < 100; ++i) {
    auto id = new_id();
    auto o = options(id);
    o.netmon = false;
    o.edge_master = edge_registry.address();
    auto rec = deploy(plan, mock, *local_, o);
    ASSERT_EQ(rec.status, DeployStatus::kRunning) << rec.error;
    ids.insert(rec.groups.at("worker").secret_id);
    auto torn = teardown(rec, mock, *local_);
    EXPECT_EQ(torn.status, DeployStatus::kTornDown);
    EXPECT_TRUE(mock.list_instances(id).empty());
  }
  EXPECT_EQ(ids.size(), 100u);
}

TEST_F(DeployTest, MockRemoteScriptedSetupFailure)
{
  MockScript script;
  script.by_label["setup"] = ExecResult{2, "no space left on device", 0};
  MockRemoteProvider mock(script);
  auto id = new_id();
  auto o = options(id);
  o.verify_channel = false;
  auto plan = plan_deployment(two_cloud_nodes("setup_script = init.bash"), manifest::builtin_catalog());
  auto rec = deploy(plan, mock, *local_, o);
  EXPECT_EQ(rec.status, DeployStatus::kFailed);
  EXPECT_EQ(rec.failed_step, 3);
  EXPECT_NE(rec.error.find("no space"), std::string::npos);
  expect_clean(id, mock);
  bool terminated = false;
  for (const auto & c : mock.calls()) {
    terminated |= c.op == "terminate" && c.instance.name == "worker";
  }
  EXPECT_TRUE(terminated);
}

TEST_F(DeployTest, ImageGroupRunsContainerWithGpuFlag)
{
  auto id = new_id();
  auto m = manifest::parse_manifest(
    "[cloud grasp]\nimage = dexnet:gpu\ninstance_type = g4dn.xlarge\n"
    "[node dexnet]\nargs = --iterations, 1000\nplacement = cloud:grasp\n");
  auto rec = deploy(plan_deployment(m, manifest::builtin_catalog()), *local_, *local_, options(id));
  ASSERT_EQ(rec.status, DeployStatus::kRunning) << rec.error;
  auto h = *rec.groups.at("grasp").instance;
  auto log = local_->instance_root(h) / "logs" / "dexnet.log";
  EXPECT_TRUE(wait_until([&] {
      std::ifstream in(log);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      return text.find("gpu run configuration") != std::string::npos;
    }, 3s));
  teardown(rec, *local_, *local_);
  expect_clean(id, *local_);
}

}  // namespace
}  // namespace fog::provision
