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

#include "fog/provision/deploy.hpp"

#include <spdlog/spdlog.h>
#include <sys/stat.h>

#include <algorithm>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>
#include <thread>

#include "fog/bridge/channel.hpp"
#include "fog/common/error.hpp"
#include "fog/common/ids.hpp"
#include "fog/common/kvfile.hpp"

namespace fog::provision
{

namespace fs = std::filesystem;
using manifest::NetworkMode;
using namespace std::chrono_literals;

namespace
{

constexpr std::array<std::string_view, 7> kStatusNames{
  "PROVISIONING", "PUSHING", "SETUP", "NETWORKING", "RUNNING", "FAILED", "TORN_DOWN"};

/// Largest group one instance's port block can host (proxy node plus slack).
constexpr int kMaxNodesPerGroup = kPortBlock - kFirstNodeOffset - 2 - 8;

struct StepFailure
{
  int step;
  std::string group;
  std::string message;
};

std::string one_line(std::string s)
{
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return std::string(trim(s));
}

std::string tail_of(const std::string & s, std::size_t n = 300)
{
  return one_line(s.size() <= n ? s : s.substr(s.size() - n));
}

std::string action_for(const GroupPlan & g, int step)
{
  bool image = g.spec.image.has_value();
  switch (step) {
    case 1: return "provision";
    case 2: return image ? "pull image" : "push";
    case 3: return "setup";
    case 4: return "networking";
    default: return image ? "run container" : "launch";
  }
}

class Deployer
{
public:
  Deployer(const DeploymentPlan & plan, Provider & cloud, LocalProvider & edge,
    const DeployOptions & options)
  : plan_(plan), cloud_(cloud), edge_(edge), opts_(options) {}

  DeploymentRecord run();

private:
  void set_status(DeployStatus s);
  void emit(const StepEvent & e);
  void step_ok(int step, const std::string & group);
  [[noreturn]] void fail(int step, const std::string & group, const std::string & message);

  ExecResult must_exec(Provider & p, const InstanceHandle & h, int step, const std::string & group,
    ExecRequest req);
  void wait_reachable(Provider & p, const InstanceHandle & h, const net::Address & addr, int step,
    const std::string & group);
  std::string tool(const char * name) const {return (opts_.tools_dir / name).string();}
  fs::path credential_path(const std::string & group) const
  {
    return edge_.deployment_root(rec_.id) / "credentials" / group / "credentials.secret";
  }
  void add_edge_process(const std::string & name, int pid)
  {
    std::lock_guard<std::mutex> lock(mu_);
    rec_.edge_processes.push_back({name, pid});
  }

  void start_edge();
  void launch_edge_nodes();
  void write_credentials();
  void provision(const GroupPlan & g);
  void push(const GroupPlan & g);
  void setup(const GroupPlan & g);
  void networking(const GroupPlan & g);
  void launch(const GroupPlan & g);
  void node_env(const std::string & node, const net::Address & registry, wire::Origin origin,
    std::map<std::string, std::string> & env) const;
  void parallel(int step, const std::function<void(const GroupPlan &)> & fn);
  void rollback();

  const DeploymentPlan & plan_;
  Provider & cloud_;
  LocalProvider & edge_;
  const DeployOptions & opts_;
  std::mutex mu_;
  DeploymentRecord rec_;
  std::map<std::string, bridge::Secret> secrets_;
};

void Deployer::set_status(DeployStatus s)
{
  {
    std::lock_guard<std::mutex> lock(mu_);
    rec_.status = s;
    rec_.history.push_back(s);
  }
  if (opts_.on_status) {
    opts_.on_status(s);
  }
}

void Deployer::emit(const StepEvent & e)
{
  std::lock_guard<std::mutex> lock(mu_);
  spdlog::info("deploy {}: {}{}", rec_.id, e.line(), e.detail.empty() ? "" : " (" + e.detail + ")");
  if (opts_.on_step) {
    opts_.on_step(e);
  }
}

void Deployer::step_ok(int step, const std::string & group)
{
  const GroupPlan * g = nullptr;
  for (const auto & gp : plan_.groups) {
    if (gp.spec.name == group) {
      g = &gp;
    }
  }
  emit(StepEvent{step, group, g ? action_for(*g, step) : "edge launch", true, ""});
}

void Deployer::fail(int step, const std::string & group, const std::string & message)
{
  throw StepFailure{step, group, message};
}

ExecResult Deployer::must_exec(Provider & p, const InstanceHandle & h, int step,
  const std::string & group, ExecRequest req)
{
  ExecResult r;
  try {
    r = p.exec(h, req);
  } catch (const Error & e) {
    fail(step, group, e.what());
  }
  if (r.status != 0) {
    fail(step, group, req.argv.front() + " exited with " + std::to_string(r.status) +
      (r.output.empty() ? "" : ": " + tail_of(r.output)));
  }
  return r;
}

void Deployer::wait_reachable(Provider & p, const InstanceHandle & h, const net::Address & addr,
  int step, const std::string & group)
{
  ExecRequest req;
  req.argv = {tool("fog-instance"), "wait", addr.str(), "--timeout-ms",
    std::to_string(opts_.network_timeout.count())};
  req.label = step == 4 ? "networking" : step == 0 ? "edge" : "launch";
  req.timeout = opts_.network_timeout + 5s;
  must_exec(p, h, step, group, req);
}

void Deployer::node_env(const std::string & node, const net::Address & registry,
  wire::Origin origin, std::map<std::string, std::string> & env) const
{
  env["FOG_MASTER"] = registry.str();
  env["FOG_NODE_NAME"] = node;
  env["FOG_ORIGIN"] = std::string(wire::to_string(origin));
  env["FOG_TRACE"] = opts_.trace ? "1" : "0";
}

void Deployer::start_edge()
{
  bool any_proxy = false;
  bool any_direct = false;
  for (const auto & g : plan_.groups) {
    (g.spec.network == NetworkMode::kProxy ? any_proxy : any_direct) = true;
  }
  bool need = !plan_.edge_nodes.empty() || !opts_.edge_master || any_proxy || (any_direct && opts_.netmon);
  if (opts_.edge_master) {
    rec_.edge_registry = opts_.edge_master;
  }
  if (!need) {
    return;
  }
  try {
    rec_.edge = edge_.create_instance(rec_.id, "edge", opts_.edge_machine, SecurityRules::open());
  } catch (const Error & e) {
    fail(0, "edge", e.what());
  }
  if (!opts_.edge_master) {
    auto base = edge_.address(*rec_.edge);
    auto reg = port_address(base, kRegistryOffset);
    ExecRequest req;
    req.argv = {tool("fog-registry"), "--host", reg.host, "--port", std::to_string(reg.port)};
    req.detach = true;
    req.log_name = "registry";
    req.label = "edge";
    auto r = must_exec(edge_, *rec_.edge, 0, "edge", req);
    rec_.edge_processes.push_back({"registry", r.pid});
    wait_reachable(edge_, *rec_.edge, reg, 0, "edge");
    rec_.edge_registry = reg;
  }
}

void Deployer::launch_edge_nodes()
{
  if (plan_.edge_nodes.empty()) {
    return;
  }
  std::vector<fs::path> pkgs;
  for (const auto & p : plan_.edge_packages) {
    auto dir = manifest::find_package(opts_.package_path, p);
    if (!dir) {
      fail(0, "edge", "package " + p + " not found");
    }
    pkgs.push_back(*dir);
  }
  try {
    edge_.push_files(*rec_.edge, pkgs, "code");
  } catch (const Error & e) {
    fail(0, "edge", e.what());
  }
  for (const auto & n : plan_.edge_nodes) {
    ExecRequest req;
    req.argv = {"code/" + n.package + "/" + n.exec};
    req.argv.insert(req.argv.end(), n.args.begin(), n.args.end());
    req.detach = true;
    req.log_name = n.name;
    req.label = "edge";
    node_env(n.name, *rec_.edge_registry, wire::Origin::kEdge, req.env);
    auto r = must_exec(edge_, *rec_.edge, 0, "edge", req);
    add_edge_process(n.name, r.pid);
    std::lock_guard<std::mutex> lock(mu_);
    rec_.edge_nodes.push_back(n.name);
  }
}

void Deployer::write_credentials()
{
  auto dir = edge_.deployment_root(rec_.id) / "credentials";
  fs::create_directories(dir);
  ::chmod(dir.c_str(), 0700);
  for (const auto & g : plan_.groups) {
    auto secret = bridge::generate_secret();
    auto path = credential_path(g.spec.name);
    fs::create_directories(path.parent_path());
    {
      std::ofstream out(path, std::ios::trunc);
      out << bridge::secret_to_hex(secret) << "\n";
    }
    ::chmod(path.c_str(), 0600);
    secrets_[g.spec.name] = secret;
    rec_.credential_files.push_back(path.string());
    auto & gr = rec_.groups[g.spec.name];
    gr.name = g.spec.name;
    gr.instance_type = g.spec.instance_type;
    gr.network = g.spec.network;
    gr.secret_id = bridge::secret_id(secret);
    for (const auto & n : g.nodes) {
      gr.nodes.push_back(n.name);
    }
  }
}

void Deployer::parallel(int step, const std::function<void(const GroupPlan &)> & fn)
{
  std::vector<std::future<std::optional<StepFailure>>> futures;
  for (const auto & g : plan_.groups) {
    futures.push_back(std::async(std::launch::async, [&fn, &g, step, this]() -> std::optional<StepFailure> {
        try {
          fn(g);
          step_ok(step, g.spec.name);
          return std::nullopt;
        } catch (const StepFailure & f) {
          return f;
        } catch (const std::exception & e) {
          return StepFailure{step, g.spec.name, e.what()};
        }
      }));
  }
  std::optional<StepFailure> first;
  for (auto & f : futures) {
    auto r = f.get();
    if (r && !first) {
      first = r;
    }
  }
  if (first) {
    throw *first;
  }
}

void Deployer::provision(const GroupPlan & g)
{
  int node_ports = static_cast<int>(g.nodes.size()) + 3;
  InstanceHandle h;
  try {
    h = cloud_.create_instance(rec_.id, g.spec.name, g.machine, SecurityRules::for_nodes(node_ports));
  } catch (const Error & e) {
    fail(1, g.spec.name, e.what());
  }
  std::lock_guard<std::mutex> lock(mu_);
  auto & gr = rec_.groups[g.spec.name];
  gr.instance = h;
  try {
    gr.base = cloud_.address(h);
  } catch (const Error & e) {
    fail(1, g.spec.name, e.what());
  }
}

void Deployer::push(const GroupPlan & g)
{
  const auto & h = *rec_.groups.at(g.spec.name).instance;
  std::vector<fs::path> files;
  std::string remote = "code";
  if (g.spec.image) {
    auto dir = manifest::find_image(opts_.image_path, *g.spec.image);
    if (!dir) {
      fail(2, g.spec.name, "image " + *g.spec.image + " not found");
    }
    files.push_back(*dir);
    remote = "image";
  } else {
    for (const auto & p : g.packages) {
      auto dir = manifest::find_package(opts_.package_path, p);
      if (!dir) {
        fail(2, g.spec.name, "package " + p + " not found");
      }
      files.push_back(*dir);
    }
  }
  try {
    cloud_.push_files(h, files, remote);
    // Credentials are installed alongside the code.
    cloud_.push_files(h, {credential_path(g.spec.name)}, "setup");
  } catch (const Error & e) {
    fail(2, g.spec.name, e.what());
  }
}

void Deployer::setup(const GroupPlan & g)
{
  if (!g.spec.setup_script) {
    return;
  }
  const auto & h = *rec_.groups.at(g.spec.name).instance;
  fs::path script = *g.spec.setup_script;
  if (script.is_relative()) {
    script = opts_.base_dir / script;
  }
  try {
    cloud_.push_files(h, {script}, "setup");
  } catch (const Error & e) {
    fail(3, g.spec.name, e.what());
  }
  ExecRequest req;
  req.argv = {"/bin/sh", "setup/" + script.filename().string()};
  req.label = "setup";
  req.timeout = 120s;
  must_exec(cloud_, h, 3, g.spec.name, req);
}

void Deployer::networking(const GroupPlan & g)
{
  auto & gr = rec_.groups.at(g.spec.name);
  const auto & h = *gr.instance;
  const auto base = *gr.base;
  const std::string & name = g.spec.name;
  if (g.spec.network == NetworkMode::kDirect) {
    wait_reachable(cloud_, h, *rec_.edge_registry, 4, name);
    gr.registry = rec_.edge_registry;
    if (opts_.netmon && rec_.edge) {
      ExecRequest req;
      req.argv = {tool("fog-netmon"), "--agent", port_address(base, kAgentOffset).str(),
        "--interval-ms", std::to_string(opts_.monitor_interval.count())};
      req.detach = true;
      req.log_name = "netmon-" + name;
      req.label = "networking";
      node_env("fog_netmon_" + name, *rec_.edge_registry, wire::Origin::kEdge, req.env);
      auto r = must_exec(edge_, *rec_.edge, 4, name, req);
      add_edge_process("netmon-" + name, r.pid);
    }
    return;
  }

  auto reg = port_address(base, kRegistryOffset);
  auto chan = port_address(base, kProxyOffset);
  ExecRequest r1;
  r1.argv = {tool("fog-registry"), "--host", reg.host, "--port", std::to_string(reg.port)};
  r1.detach = true;
  r1.log_name = "registry";
  r1.label = "networking";
  gr.processes.push_back({"registry", must_exec(cloud_, h, 4, name, r1).pid});
  wait_reachable(cloud_, h, reg, 4, name);
  gr.registry = reg;

  std::vector<std::string> topic_args;
  if (g.spec.topics) {
    topic_args = {"--topics", join_list(*g.spec.topics)};
  }
  auto common = [&](ExecRequest & req) {
      req.argv.insert(req.argv.end(), topic_args.begin(), topic_args.end());
      req.argv.insert(req.argv.end(), {"--poll-ms", std::to_string(opts_.proxy_poll.count()),
        "--monitor-ms", std::to_string(opts_.monitor_interval.count())});
      req.detach = true;
      req.label = "networking";
    };
  ExecRequest r2;
  r2.argv = {tool("fog-proxy"), "--side", "cloud", "--role", "responder", "--registry", reg.str(),
    "--listen-port", std::to_string(chan.port), "--secret-file", "setup/credentials.secret",
    "--name", "fog_proxy_cloud"};
  r2.log_name = "proxy";
  common(r2);
  r2.env["FOG_DEPLOYMENT"] = rec_.id;
  gr.processes.push_back({"proxy", must_exec(cloud_, h, 4, name, r2).pid});
  wait_reachable(cloud_, h, chan, 4, name);
  gr.channel = chan;

  auto status = edge_.instance_root(*rec_.edge) / "logs" / ("proxy-" + name + ".status");
  ExecRequest r3;
  r3.argv = {tool("fog-proxy"), "--side", "edge", "--role", "initiator", "--registry",
    rec_.edge_registry->str(), "--peer", chan.str(), "--secret-file",
    credential_path(name).string(),
    "--status-file", status.string(), "--name", "fog_proxy_edge_" + name};
  r3.log_name = "proxy-" + name;
  common(r3);
  auto edge_proxy = must_exec(edge_, *rec_.edge, 4, name, r3);
  add_edge_process("proxy-" + name, edge_proxy.pid);
  gr.edge_proxy_status = status.string();

  if (opts_.verify_channel) {
    auto deadline = std::chrono::steady_clock::now() + opts_.network_timeout;
    while (true) {
      std::ifstream in(status);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      if (text.find("channel = up") != std::string::npos) {
        break;
      }
      if (std::chrono::steady_clock::now() >= deadline) {
        fail(4, name, "proxy channel did not come up");
      }
      std::this_thread::sleep_for(50ms);
    }
  }
}

void Deployer::launch(const GroupPlan & g)
{
  auto & gr = rec_.groups.at(g.spec.name);
  const auto & h = *gr.instance;
  for (const auto & n : g.nodes) {
    ExecRequest req;
    if (g.spec.image) {
      req.argv = {"image/" + manifest::image_dir_name(*g.spec.image) + "/entrypoint"};
    } else {
      req.argv = {"code/" + n.package + "/" + n.exec};
    }
    req.argv.insert(req.argv.end(), n.args.begin(), n.args.end());
    req.detach = true;
    req.log_name = n.name;
    req.label = "launch";
    node_env(n.name, *gr.registry, wire::Origin::kCloud, req.env);
    gr.processes.push_back({n.name, must_exec(cloud_, h, 5, g.spec.name, req).pid});
  }
}

void Deployer::rollback()
{
  auto r = teardown(rec_, cloud_, edge_);
  rec_.credentials_revoked = r.credentials_revoked;
  rec_.teardown_errors = r.teardown_errors;
}

DeploymentRecord Deployer::run()
{
  rec_.id = opts_.deployment_id.empty() ? random_hex(8) : opts_.deployment_id;
  rec_.provider = cloud_.kind();
  rec_.trace = opts_.trace;
  if (!cloud_.list_instances(rec_.id).empty() || !edge_.list_instances(rec_.id).empty()) {
    throw Error(ErrorCode::kAlreadyDeployed, "deployment " + rec_.id + " already exists");
  }
  set_status(DeployStatus::kProvisioning);
  std::future<std::optional<StepFailure>> edge_launch;
  try {
    write_credentials();
    start_edge();
    if (!plan_.edge_nodes.empty()) {
      edge_launch = std::async(std::launch::async, [this]() -> std::optional<StepFailure> {
          try {
            launch_edge_nodes();
            emit(StepEvent{0, "edge", "edge launch", true, ""});
            return std::nullopt;
          } catch (const StepFailure & f) {
            return f;
          } catch (const std::exception & e) {
            return StepFailure{0, "edge", e.what()};
          }
        });
    }
    parallel(1, [this](const GroupPlan & g) {provision(g);});
    set_status(DeployStatus::kPushing);
    parallel(2, [this](const GroupPlan & g) {push(g);});
    set_status(DeployStatus::kSetup);
    parallel(3, [this](const GroupPlan & g) {setup(g);});
    set_status(DeployStatus::kNetworking);
    for (const auto & g : plan_.groups) {
      networking(g);
      step_ok(4, g.spec.name);
    }
    for (const auto & g : plan_.groups) {
      launch(g);
      step_ok(5, g.spec.name);
    }
    if (edge_launch.valid()) {
      if (auto f = edge_launch.get()) {
        throw *f;
      }
    }
    set_status(DeployStatus::kRunning);
  } catch (const StepFailure & f) {
    if (edge_launch.valid()) {
      edge_launch.wait();
    }
    const GroupPlan * g = nullptr;
    for (const auto & gp : plan_.groups) {
      if (gp.spec.name == f.group) {
        g = &gp;
      }
    }
    emit(StepEvent{f.step, f.group, g ? action_for(*g, f.step) : "edge launch", false, f.message});
    rec_.failed_step = f.step;
    rec_.failed_group = f.group;
    rec_.error = one_line(f.message);
    set_status(DeployStatus::kFailed);
    rollback();
    rec_.status = DeployStatus::kFailed;
  }
  return rec_;
}

void add(KvSection & s, const std::string & k, const std::string & v)
{
  if (!v.empty()) {
    s.entries.push_back({k, v, 0});
  }
}

std::string render_procs(const std::vector<ProcessRecord> & ps)
{
  std::vector<std::string> items;
  for (const auto & p : ps) {
    items.push_back(p.name + ":" + std::to_string(p.pid));
  }
  return join_list(items);
}

std::vector<ProcessRecord> parse_procs(const std::string & v, int line)
{
  std::vector<ProcessRecord> out;
  for (const auto & item : split_list(v, line)) {
    auto c = item.rfind(':');
    if (c == std::string::npos) {
      throw ParseError(ErrorCode::kSyntaxError, line, "bad process entry '" + item + "'");
    }
    out.push_back({item.substr(0, c), static_cast<int>(parse_int(item.substr(c + 1), line))});
  }
  return out;
}

std::optional<net::Address> parse_addr(const std::string & v, int line)
{
  auto a = net::parse_address(v);
  if (!a) {
    throw ParseError(ErrorCode::kSyntaxError, line, "bad address '" + v + "'");
  }
  return a;
}

std::string handle_str(const InstanceHandle & h)
{
  return h.name + ":" + h.id;
}

InstanceHandle parse_handle(const std::string & dep, const std::string & v, int line)
{
  auto c = v.rfind(':');
  if (c == std::string::npos) {
    throw ParseError(ErrorCode::kSyntaxError, line, "bad instance '" + v + "'");
  }
  return {dep, v.substr(0, c), v.substr(c + 1)};
}

}  // namespace

std::string_view to_string(DeployStatus s)
{
  return kStatusNames[static_cast<std::size_t>(s)];
}

std::optional<DeployStatus> parse_status(std::string_view text)
{
  for (std::size_t i = 0; i < kStatusNames.size(); ++i) {
    if (kStatusNames[i] == text) {
      return static_cast<DeployStatus>(i);
    }
  }
  return std::nullopt;
}

std::string StepEvent::line() const
{
  if (index == 0) {
    return std::string("edge launch ") + (ok ? "ok" : "fail");
  }
  return "[" + std::to_string(index) + "/" + std::to_string(kStepCount) + "] " + group + " " +
         action + " " + (ok ? "ok" : "fail");
}

DeploymentPlan plan_deployment(const manifest::LaunchManifest & m, const manifest::Catalog & catalog)
{
  DeploymentPlan plan;
  plan.manifest = m;
  if (m.nodes.empty()) {
    throw Error(ErrorCode::kInvalidManifest, "manifest has no nodes");
  }
  auto packages = manifest::collect_packages(m);
  for (const auto & [name, spec] : m.cloud_groups) {
    const auto * machine = catalog.find(spec.instance_type);
    if (!machine) {
      throw Error(ErrorCode::kInvalidManifest,
              "group " + name + ": unknown instance type " + spec.instance_type);
    }
    GroupPlan g;
    g.spec = spec;
    g.machine = *machine;
    for (const auto * n : m.nodes_in(manifest::Placement::in(name))) {
      g.nodes.push_back(*n);
    }
    if (static_cast<int>(g.nodes.size()) > kMaxNodesPerGroup) {
      throw Error(ErrorCode::kInvalidManifest, "group " + name + " has more than " +
              std::to_string(kMaxNodesPerGroup) + " nodes");
    }
    if (auto it = packages.find(name); it != packages.end()) {
      g.packages.assign(it->second.begin(), it->second.end());
    }
    for (int step = 1; step <= kStepCount; ++step) {
      plan.steps.push_back({step, name, action_for(g, step)});
    }
    plan.groups.push_back(std::move(g));
  }
  std::set<std::string> edge_pkgs;
  for (const auto * n : m.nodes_in(manifest::Placement::edge())) {
    plan.edge_nodes.push_back(*n);
    edge_pkgs.insert(n->package);
  }
  plan.edge_packages.assign(edge_pkgs.begin(), edge_pkgs.end());
  if (!plan.edge_nodes.empty()) {
    plan.steps.push_back({0, "edge", "edge launch"});
  }
  return plan;
}

DeploymentRecord deploy(const DeploymentPlan & plan, Provider & cloud, LocalProvider & edge,
  const DeployOptions & options)
{
  Deployer d(plan, cloud, edge, options);
  return d.run();
}

DeploymentRecord teardown(DeploymentRecord record, Provider & cloud, LocalProvider & edge)
{
  if (record.status == DeployStatus::kTornDown) {
    return record;
  }
  record.teardown_errors.clear();
  auto attempt = [&](const std::string & what, const std::function<void()> & fn) {
      try {
        fn();
      } catch (const std::exception & e) {
        record.teardown_errors.push_back(what + ": " + one_line(e.what()));
      }
    };
  // The edge first, so proxies and monitors stop before their peers vanish.
  std::set<InstanceHandle> edge_instances;
  if (record.edge) {
    edge_instances.insert(*record.edge);
  }
  attempt("edge list", [&] {
      for (const auto & h : edge.list_instances(record.id)) {
        edge_instances.insert(h);
      }
    });
  for (const auto & h : edge_instances) {
    attempt("edge " + h.name, [&] {edge.terminate(h);});
  }
  std::set<InstanceHandle> cloud_instances;
  for (const auto & [name, g] : record.groups) {
    if (g.instance) {
      cloud_instances.insert(*g.instance);
    }
  }
  attempt("cloud list", [&] {
      for (const auto & h : cloud.list_instances(record.id)) {
        cloud_instances.insert(h);
      }
    });
  for (const auto & h : cloud_instances) {
    attempt("instance " + h.name, [&] {cloud.terminate(h);});
  }
  std::error_code ec;
  for (const auto & f : record.credential_files) {
    fs::remove(f, ec);
  }
  auto cred_dir = edge.deployment_root(record.id) / "credentials";
  fs::remove_all(cred_dir, ec);
  record.credentials_revoked = true;
  auto root = edge.deployment_root(record.id);
  if (fs::is_directory(root, ec) && fs::is_empty(root, ec)) {
    fs::remove(root, ec);
  }
  bool clean = true;
  attempt("verify", [&] {
      clean = cloud.list_instances(record.id).empty() && edge.list_instances(record.id).empty();
    });
  if (clean && record.teardown_errors.empty()) {
    if (record.status != DeployStatus::kFailed) {
      record.history.push_back(DeployStatus::kTornDown);
    }
    record.status = DeployStatus::kTornDown;
  }
  return record;
}

std::string render_record(const DeploymentRecord & r)
{
  KvSection d{"deployment", r.id, 0, {}};
  add(d, "provider", r.provider);
  add(d, "status", std::string(to_string(r.status)));
  std::vector<std::string> hist;
  for (auto s : r.history) {
    hist.emplace_back(to_string(s));
  }
  add(d, "history", join_list(hist));
  if (r.failed_step || !r.failed_group.empty()) {
    add(d, "failed_step", std::to_string(r.failed_step));
  }
  add(d, "failed_group", r.failed_group);
  add(d, "error", one_line(r.error));
  add(d, "trace", r.trace ? "true" : "false");
  if (r.edge) {
    add(d, "edge_instance", handle_str(*r.edge));
  }
  if (r.edge_registry) {
    add(d, "edge_registry", r.edge_registry->str());
  }
  add(d, "edge_processes", render_procs(r.edge_processes));
  add(d, "edge_nodes", join_list(r.edge_nodes));
  add(d, "credentials", join_list(r.credential_files));
  add(d, "credentials_revoked", r.credentials_revoked ? "true" : "false");
  std::vector<std::string> errs;
  for (const auto & e : r.teardown_errors) {
    auto x = one_line(e);
    std::replace(x.begin(), x.end(), ',', ';');
    errs.push_back(x);
  }
  add(d, "teardown_errors", join_list(errs));
  std::string out = render_section(d);
  for (const auto & [name, g] : r.groups) {
    KvSection s{"group", name, 0, {}};
    add(s, "instance_type", g.instance_type);
    if (g.instance) {
      add(s, "instance", handle_str(*g.instance));
    }
    if (g.base) {
      add(s, "base", g.base->str());
    }
    add(s, "network", std::string(manifest::to_string(g.network)));
    add(s, "secret_id", g.secret_id);
    if (g.registry) {
      add(s, "registry", g.registry->str());
    }
    if (g.channel) {
      add(s, "channel", g.channel->str());
    }
    add(s, "edge_proxy_status", g.edge_proxy_status);
    add(s, "processes", render_procs(g.processes));
    add(s, "nodes", join_list(g.nodes));
    out += "\n" + render_section(s);
  }
  return out;
}

DeploymentRecord parse_record(std::string_view text)
{
  DeploymentRecord r;
  bool seen = false;
  for (const auto & s : parse_sections(text)) {
    if (s.kind == "deployment") {
      seen = true;
      r.id = s.name;
      for (const auto & e : s.entries) {
        const auto & v = e.value;
        if (e.key == "provider") {
          r.provider = v;
        } else if (e.key == "status") {
          auto st = parse_status(v);
          if (!st) {
            throw ParseError(ErrorCode::kSyntaxError, e.line, "bad status '" + v + "'");
          }
          r.status = *st;
        } else if (e.key == "history") {
          for (const auto & h : split_list(v, e.line)) {
            auto st = parse_status(h);
            if (!st) {
              throw ParseError(ErrorCode::kSyntaxError, e.line, "bad status '" + h + "'");
            }
            r.history.push_back(*st);
          }
        } else if (e.key == "failed_step") {
          r.failed_step = static_cast<int>(parse_int(v, e.line));
        } else if (e.key == "failed_group") {
          r.failed_group = v;
        } else if (e.key == "error") {
          r.error = v;
        } else if (e.key == "trace") {
          r.trace = parse_bool(v, e.line);
        } else if (e.key == "edge_instance") {
          r.edge = parse_handle(r.id, v, e.line);
        } else if (e.key == "edge_registry") {
          r.edge_registry = parse_addr(v, e.line);
        } else if (e.key == "edge_processes") {
          r.edge_processes = parse_procs(v, e.line);
        } else if (e.key == "edge_nodes") {
          r.edge_nodes = split_list(v, e.line);
        } else if (e.key == "credentials") {
          r.credential_files = split_list(v, e.line);
        } else if (e.key == "credentials_revoked") {
          r.credentials_revoked = parse_bool(v, e.line);
        } else if (e.key == "teardown_errors") {
          r.teardown_errors = split_list(v, e.line);
        } else {
          throw ParseError(ErrorCode::kUnknownKey, e.line, "unknown key '" + e.key + "'");
        }
      }
    } else if (s.kind == "group") {
      GroupRecord g;
      g.name = s.name;
      for (const auto & e : s.entries) {
        const auto & v = e.value;
        if (e.key == "instance_type") {
          g.instance_type = v;
        } else if (e.key == "instance") {
          g.instance = parse_handle(r.id, v, e.line);
        } else if (e.key == "base") {
          g.base = parse_addr(v, e.line);
        } else if (e.key == "network") {
          if (v == "proxy") {
            g.network = NetworkMode::kProxy;
          } else if (v == "direct") {
            g.network = NetworkMode::kDirect;
          } else {
            throw ParseError(ErrorCode::kSyntaxError, e.line, "bad network '" + v + "'");
          }
        } else if (e.key == "secret_id") {
          g.secret_id = v;
        } else if (e.key == "registry") {
          g.registry = parse_addr(v, e.line);
        } else if (e.key == "channel") {
          g.channel = parse_addr(v, e.line);
        } else if (e.key == "edge_proxy_status") {
          g.edge_proxy_status = v;
        } else if (e.key == "processes") {
          g.processes = parse_procs(v, e.line);
        } else if (e.key == "nodes") {
          g.nodes = split_list(v, e.line);
        } else {
          throw ParseError(ErrorCode::kUnknownKey, e.line, "unknown key '" + e.key + "'");
        }
      }
      r.groups[g.name] = std::move(g);
    } else {
      throw ParseError(ErrorCode::kUnknownKey, s.line, "unknown section '" + s.kind + "'");
    }
  }
  if (!seen) {
    throw Error(ErrorCode::kSyntaxError, "record has no deployment section");
  }
  // Group sections may precede the deployment section in hand-written files.
  for (auto & [name, g] : r.groups) {
    if (g.instance) {
      g.instance->deployment_id = r.id;
    }
  }
  return r;
}

}  // namespace fog::provision
