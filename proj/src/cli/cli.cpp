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

#include "fog/cli/cli.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fog/bench/runner.hpp"
#include "fog/common/error.hpp"
#include "fog/common/ids.hpp"
#include "fog/common/kvfile.hpp"
#include "fog/manifest/manifest.hpp"
#include "fog/netmon/netmon.hpp"
#include "fog/node/node.hpp"
#include "fog/provision/deploy.hpp"
#include "fog/provision/local_provider.hpp"
#include "fog/provision/mock_provider.hpp"
#include "fog/registry/registry.hpp"

namespace fog::cli
{

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace std::chrono_literals;

namespace
{

/// Text or one JSON object per line.
class Printer
{
public:
  Printer(std::ostream & out, bool json)
  : out_(out), json_(json) {}

  void emit(const std::string & text, const json & obj)
  {
    if (json_) {
      out_ << obj.dump() << "\n";
    } else {
      out_ << text << "\n";
    }
    out_.flush();
  }

  bool json_mode() const {return json_;}

private:
  std::ostream & out_;
  bool json_;
};

class StateLock
{
public:
  explicit StateLock(const fs::path & file)
  {
    fd_ = ::open(file.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0600);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
      throw Error(ErrorCode::kIo, "cannot lock " + file.string());
    }
  }
  ~StateLock()
  {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  StateLock(const StateLock &) = delete;
  StateLock & operator=(const StateLock &) = delete;

private:
  int fd_{-1};
};

fs::path record_path(const std::string & id) {return state_dir() / (id + ".deploy");}
fs::path lock_path(const std::string & id) {return state_dir() / (id + ".lock");}
fs::path mock_path(const std::string & id) {return state_dir() / (id + ".mock");}

bool valid_id(const std::string & id)
{
  if (id.empty() || id.size() > 64) {
    return false;
  }
  for (char c : id) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
      return false;
    }
  }
  return true;
}

std::optional<provision::DeploymentRecord> load_record(const std::string & id)
{
  if (!valid_id(id)) {
    return std::nullopt;
  }
  std::ifstream in(record_path(id));
  if (!in) {
    return std::nullopt;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return provision::parse_record(ss.str());
}

void save_record(const provision::DeploymentRecord & r)
{
  auto path = record_path(r.id);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << provision::render_record(r);
    if (!out) {
      throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

struct Providers
{
  std::unique_ptr<provision::LocalProvider> edge;
  std::unique_ptr<provision::MockRemoteProvider> mock;

  provision::Provider & cloud()
  {
    if (mock) {
      return *mock;
    }
    return *edge;
  }
};

Providers make_providers(const std::string & kind, const std::string & id)
{
  Providers p;
  p.edge = std::make_unique<provision::LocalProvider>();
  if (kind == "mock-remote") {
    p.mock = std::make_unique<provision::MockRemoteProvider>(provision::MockScript{}, mock_path(id));
  }
  return p;
}

bool process_alive(int pid)
{
  if (pid <= 0) {
    return false;
  }
  std::ifstream in("/proc/" + std::to_string(pid) + "/stat");
  std::string content;
  if (!in || !std::getline(in, content)) {
    return false;
  }
  auto close = content.rfind(')');
  return close == std::string::npos || close + 2 >= content.size() || content[close + 2] != 'Z';
}

std::string process_state(const std::string & provider, int pid)
{
  if (provider == "mock-remote") {
    return "remote";
  }
  return process_alive(pid) ? "alive" : "dead";
}

std::string opt_str(const std::optional<net::Address> & a) {return a ? a->str() : "-";}

std::string endpoint_names(const std::map<NodeId, registry::Endpoint> & m)
{
  std::vector<std::string> names;
  for (const auto & [id, e] : m) {
    names.push_back(e.node_name);
  }
  return names.empty() ? "-" : join_list(names);
}

int unknown_deployment(std::ostream & err, const std::string & id)
{
  err << "error: unknown deployment " << id << "\n";
  return kExitUnknownDeployment;
}

// ---------------------------------------------------------------- launch

struct LaunchArgs
{
  std::string file;
  std::string provider{"local"};
  bool trace{false};
  std::string id;
  std::string catalog;
  std::string master;
  bool no_netmon{false};
};

int cmd_launch(const LaunchArgs & a, Printer & p, std::ostream & err)
{
  manifest::LaunchManifest m;
  try {
    m = manifest::load_manifest(a.file);
  } catch (const ParseError & e) {
    err << a.file << ":" << e.line() << ": " << e.what() << "\n";
    p.emit("invalid manifest", {{"event", "invalid"}, {"line", e.line()}, {"error", e.what()}});
    return kExitValidation;
  } catch (const Error & e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kIo ? kExitUsage : kExitValidation;
  }
  manifest::Catalog catalog = manifest::builtin_catalog();
  if (!a.catalog.empty()) {
    catalog = manifest::load_catalog(a.catalog);
  }
  provision::DeployOptions opts;
  opts.base_dir = fs::absolute(a.file).parent_path();
  opts.trace = a.trace;
  opts.netmon = !a.no_netmon;
  opts.verify_channel = a.provider != "mock-remote";
  if (!a.master.empty()) {
    opts.edge_master = net::parse_address(a.master);
    if (!opts.edge_master) {
      err << "error: bad --master address " << a.master << "\n";
      return kExitUsage;
    }
  }
  manifest::ValidateOptions vopts;
  vopts.base_dir = opts.base_dir;
  vopts.package_path = opts.package_path;
  vopts.image_path = opts.image_path;
  auto diags = manifest::validate(m, catalog, vopts);
  if (!diags.empty()) {
    for (const auto & d : diags) {
      err << a.file << ":" << d.str() << "\n";
      p.emit("invalid " + d.str(), {{"event", "invalid"}, {"line", d.line},
          {"code", std::string(manifest::to_string(d.code))}, {"error", d.message}});
    }
    return kExitValidation;
  }
  provision::DeploymentPlan plan;
  try {
    plan = provision::plan_deployment(m, catalog);
  } catch (const Error & e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  std::string id = a.id.empty() ? random_hex(8) : a.id;
  if (!valid_id(id)) {
    err << "error: bad deployment id " << id << "\n";
    return kExitUsage;
  }
  fs::create_directories(state_dir());
  StateLock lock(lock_path(id));
  if (fs::exists(record_path(id))) {
    err << "error: deployment " << id << " already exists\n";
    return kExitDeployFailed;
  }
  opts.deployment_id = id;
  opts.on_step = [&](const provision::StepEvent & ev) {
      p.emit(ev.line(), {{"event", "step"}, {"deployment", id}, {"index", ev.index},
          {"group", ev.group}, {"action", ev.action}, {"ok", ev.ok}, {"detail", ev.detail}});
    };
  auto providers = make_providers(a.provider, id);
  provision::DeploymentRecord rec;
  try {
    rec = provision::deploy(plan, providers.cloud(), *providers.edge, opts);
  } catch (const Error & e) {
    err << "error: " << e.what() << "\n";
    return kExitDeployFailed;
  }
  if (rec.status != provision::DeployStatus::kRunning) {
    if (providers.mock) {
      std::error_code ec;
      fs::remove(mock_path(id), ec);
    }
    p.emit("deployment " + id + " failed at step " + std::to_string(rec.failed_step) + ": " +
      rec.error, {{"event", "failed"}, {"deployment", id}, {"step", rec.failed_step},
        {"group", rec.failed_group}, {"error", rec.error},
        {"status", std::string(provision::to_string(rec.status))}});
    return kExitDeployFailed;
  }
  save_record(rec);
  p.emit("deployment " + id + " running", {{"event", "running"}, {"deployment", id},
      {"provider", rec.provider}, {"edge_registry", opt_str(rec.edge_registry)}});
  return kExitOk;
}

// ---------------------------------------------------------------- status

void print_bridge(const provision::GroupRecord & g, Printer & p)
{
  if (g.edge_proxy_status.empty()) {
    return;
  }
  std::ifstream in(g.edge_proxy_status);
  if (!in) {
    p.emit("  bridge unavailable", {{"event", "bridge"}, {"group", g.name}, {"channel", "unknown"}});
    return;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  std::vector<KvSection> sections;
  try {
    sections = parse_sections(ss.str());
  } catch (const Error &) {
    return;
  }
  if (sections.empty()) {
    return;
  }
  const auto & s = sections.front();
  auto get = [&](const char * k) {
      const auto * e = s.find(k);
      return e ? e->value : std::string();
    };
  p.emit("  bridge channel=" + get("channel") + " forwarded=" + get("forwarded") +
    " republished=" + get("republished"),
    {{"event", "bridge"}, {"group", g.name}, {"channel", get("channel")},
      {"forwarded", get("forwarded")}, {"republished", get("republished")}});
  for (const auto & entry : split_list(get("entries"), 0)) {
    auto sp = entry.find(' ');
    std::string topic = entry.substr(0, sp);
    std::string dir = sp == std::string::npos ? "" : entry.substr(sp + 1);
    p.emit("  bridge " + topic + " " + dir,
      {{"event", "bridge_entry"}, {"group", g.name}, {"topic", topic}, {"direction", dir}});
  }
}

int cmd_status(const std::string & id, Printer & p, std::ostream & err)
{
  auto rec = load_record(id);
  if (!rec) {
    return unknown_deployment(err, id);
  }
  p.emit("deployment " + rec->id + " provider=" + rec->provider + " status=" +
    std::string(provision::to_string(rec->status)),
    {{"event", "deployment"}, {"deployment", rec->id}, {"provider", rec->provider},
      {"status", std::string(provision::to_string(rec->status))}, {"trace", rec->trace}});
  if (rec->edge || rec->edge_registry) {
    p.emit("edge instance=" + (rec->edge ? rec->edge->id : std::string("-")) + " registry=" +
      opt_str(rec->edge_registry), {{"event", "edge"}, {"instance", rec->edge ? rec->edge->id : ""},
        {"registry", opt_str(rec->edge_registry)}});
    for (const auto & pr : rec->edge_processes) {
      auto state = process_state("local", pr.pid);
      p.emit("  process " + pr.name + " pid=" + std::to_string(pr.pid) + " " + state,
        {{"event", "process"}, {"group", "edge"}, {"name", pr.name}, {"pid", pr.pid},
          {"state", state}});
    }
  }
  for (const auto & [name, g] : rec->groups) {
    std::string inst = g.instance ? g.instance->id : "-";
    p.emit("group " + name + " type=" + g.instance_type + " instance=" + inst + " address=" +
      opt_str(g.base) + " network=" + std::string(manifest::to_string(g.network)) + " nodes=" +
      std::to_string(g.nodes.size()),
      {{"event", "group"}, {"group", name}, {"instance_type", g.instance_type},
        {"instance", inst}, {"address", opt_str(g.base)},
        {"network", std::string(manifest::to_string(g.network))}, {"registry", opt_str(g.registry)},
        {"nodes", g.nodes}});
    for (const auto & pr : g.processes) {
      auto state = process_state(rec->provider, pr.pid);
      p.emit("  process " + pr.name + " pid=" + std::to_string(pr.pid) + " " + state,
        {{"event", "process"}, {"group", name}, {"name", pr.name}, {"pid", pr.pid},
          {"state", state}});
    }
    print_bridge(g, p);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- topics

int print_table(const std::string & side, const net::Address & registry, Printer & p,
  std::ostream & err)
{
  registry::RegistryTable table;
  try {
    table = registry::query_snapshot(registry);
  } catch (const Error & e) {
    err << side << " registry " << registry.str() << " unreachable: " << e.what() << "\n";
    return kExitRuntime;
  }
  p.emit("[" + side + "] registry " + registry.str(),
    {{"event", "registry"}, {"side", side}, {"address", registry.str()}});
  for (const auto & [topic, rec] : table.topics) {
    p.emit("  " + topic.str() + " publishers=" + endpoint_names(rec.publishers) +
      " subscribers=" + endpoint_names(rec.subscribers),
      {{"event", "topic"}, {"side", side}, {"topic", topic.str()},
        {"publishers", rec.publishers.size()}, {"subscribers", rec.subscribers.size()},
        {"publisher_names", endpoint_names(rec.publishers)},
        {"subscriber_names", endpoint_names(rec.subscribers)}});
  }
  return kExitOk;
}

int cmd_topics(const std::string & id, Printer & p, std::ostream & err)
{
  auto rec = load_record(id);
  if (!rec) {
    return unknown_deployment(err, id);
  }
  int rc = kExitOk;
  if (rec->edge_registry) {
    rc = std::max(rc, print_table("edge", *rec->edge_registry, p, err));
  }
  if (rec->provider == "mock-remote") {
    return rc;
  }
  for (const auto & [name, g] : rec->groups) {
    if (g.registry && g.registry != rec->edge_registry) {
      rc = std::max(rc, print_table(name, *g.registry, p, err));
    }
  }
  return rc;
}

// ---------------------------------------------------------------- echo

int cmd_echo(const std::string & id, const std::string & topic_text, std::uint64_t count,
  int timeout_ms, Printer & p, std::ostream & err)
{
  auto rec = load_record(id);
  if (!rec) {
    return unknown_deployment(err, id);
  }
  auto topic = TopicName::parse(topic_text);
  if (!topic) {
    err << "error: invalid topic " << topic_text << "\n";
    return kExitUsage;
  }
  if (!rec->edge_registry) {
    err << "error: deployment " << id << " has no edge registry\n";
    return kExitRuntime;
  }
  node::NodeOptions o;
  o.name = "fog_echo";
  o.master = *rec->edge_registry;
  std::shared_ptr<node::Node> n;
  try {
    n = node::Node::create(o);
  } catch (const Error & e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  auto sub = n->subscribe(*topic, 64);
  bool latency = topic->str() == netmon::kLatencyTopic;
  std::uint64_t got = 0;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (got < count && std::chrono::steady_clock::now() < deadline) {
    auto env = sub->next(100ms);
    if (!env) {
      continue;
    }
    ++got;
    std::string origin(wire::to_string(env->origin));
    std::string text = "seq=" + std::to_string(env->seq) + " size=" +
      std::to_string(env->payload.size()) + " origin=" + origin;
    json obj{{"event", "message"}, {"topic", topic->str()}, {"seq", env->seq},
      {"size", env->payload.size()}, {"origin", origin}, {"hops", env->trace.size()}};
    if (latency) {
      if (auto s = netmon::decode_stats(ByteView(env->payload))) {
        text += " rtt_ms=" + std::to_string(s->rtt_ms) + (s->stale ? " stale" : "");
        obj["rtt_ms"] = s->rtt_ms;
        obj["stale"] = s->stale;
      }
    }
    p.emit(text, obj);
  }
  n->shutdown();
  if (got == 0) {
    err << "no messages on " << topic->str() << " within " << timeout_ms << " ms\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- teardown

int cmd_teardown(const std::string & id, Printer & p, std::ostream & err)
{
  if (!valid_id(id) || !fs::exists(record_path(id))) {
    return unknown_deployment(err, id);
  }
  StateLock lock(lock_path(id));
  auto rec = load_record(id);
  if (!rec) {
    return unknown_deployment(err, id);
  }
  auto providers = make_providers(rec->provider, id);
  auto done = provision::teardown(*rec, providers.cloud(), *providers.edge);
  for (const auto & e : done.teardown_errors) {
    err << "teardown: " << e << "\n";
  }
  if (!done.teardown_errors.empty()) {
    save_record(done);
    return kExitRuntime;
  }
  std::error_code ec;
  fs::remove(record_path(id), ec);
  fs::remove(mock_path(id), ec);
  fs::remove(lock_path(id), ec);
  p.emit("deployment " + id + " torn down", {{"event", "torn_down"}, {"deployment", id}});
  return kExitOk;
}

// ---------------------------------------------------------------- bench

json row_json(const bench::TimingRow & r)
{
  return {{"event", "row"}, {"scenario", r.scenario}, {"edge_only_s", r.edge_only_s},
    {"cloud_compute_s", r.cloud_compute_s}, {"network_s", r.network_s}, {"total_s", r.total_s},
    {"speedup", r.speedup}};
}

int cmd_bench(const std::string & scenario_text, bench::BenchOptions opts, double baseline_s,
  bool csv, Printer & p, std::ostream & err)
{
  auto scenario = bench::parse_scenario(scenario_text);
  if (!scenario) {
    err << "error: unknown scenario " << scenario_text << "\n";
    return kExitUsage;
  }
  opts.iterations = bench::bench_iterations(opts, opts.edge_only_type);
  provision::LocalProvider provider;
  std::vector<bench::TimingRow> rows;
  try {
    if (*scenario == bench::Scenario::kEdgeOnly || baseline_s <= 0.0) {
      auto base = bench::run_benchmark(bench::Scenario::kEdgeOnly, opts, provider);
      baseline_s = base.mean_e2e_s;
      rows.push_back(bench::timing_row(base, baseline_s));
    }
    if (*scenario != bench::Scenario::kEdgeOnly) {
      auto r = bench::run_benchmark(*scenario, opts, provider);
      for (const auto & s : r.samples) {
        if (!p.json_mode()) {
          break;
        }
        p.emit("", {{"event", "sample"}, {"scenario", scenario_text}, {"seq", s.seq},
            {"e2e_s", s.e2e_s}, {"compute_s", s.compute_s}, {"network_s", s.network_s},
            {"request_hops", s.request_hops}, {"result_hops", s.result_hops}});
      }
      rows.push_back(bench::timing_row(r, baseline_s));
    }
  } catch (const Error & e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  if (p.json_mode()) {
    for (const auto & r : rows) {
      p.emit("", row_json(r));
    }
  } else {
    std::string table = csv ? bench::render_csv(rows) : bench::render_table(rows);
    if (!table.empty() && table.back() == '\n') {
      table.pop_back();
    }
    p.emit(table, {});
  }
  return kExitOk;
}

}  // namespace

fs::path state_dir()
{
  if (const char * s = std::getenv("FOG_STATE_DIR"); s && *s) {
    return s;
  }
  if (const char * s = std::getenv("XDG_STATE_HOME"); s && *s) {
    return fs::path(s) / "fog";
  }
  if (const char * s = std::getenv("HOME"); s && *s) {
    return fs::path(s) / ".local" / "state" / "fog";
  }
  return fs::temp_directory_path() / "fog-state";
}

int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
  CLI::App app{"fog: launch and operate edge/cloud robot deployments", "fog"};
  app.require_subcommand(1);
  bool json_out = false;
  app.add_flag("--json", json_out, "one JSON object per output line");

  LaunchArgs la;
  auto * launch = app.add_subcommand("launch", "validate, plan and deploy a manifest");
  launch->add_option("manifest", la.file, "launch manifest (.fog)")->required();
  launch->add_option("--provider", la.provider, "instance provider")
  ->check(CLI::IsMember({"local", "mock-remote"}));
  launch->add_flag("--trace", la.trace, "stamp trace hops on every message");
  launch->add_option("--id", la.id, "deployment id (default: random 8-hex)");
  launch->add_option("--catalog", la.catalog, "machine catalog file");
  launch->add_option("--master", la.master, "existing edge registry host:port");
  launch->add_flag("--no-netmon", la.no_netmon, "skip the edge network monitor");
  launch->add_flag("--json", json_out, "one JSON object per output line");

  std::string id;
  auto * status = app.add_subcommand("status", "show a deployment");
  status->add_option("id", id, "deployment id")->required();
  status->add_flag("--json", json_out, "one JSON object per output line");

  auto * topics = app.add_subcommand("topics", "list registry tables of both sides");
  topics->add_option("id", id, "deployment id")->required();
  topics->add_flag("--json", json_out, "one JSON object per output line");

  std::string topic;
  std::uint64_t count = 10;
  int timeout_ms = 30000;
  auto * echo = app.add_subcommand("echo", "print messages on a topic");
  echo->add_option("id", id, "deployment id")->required();
  echo->add_option("topic", topic, "topic name")->required();
  echo->add_option("--count", count, "stop after this many messages");
  echo->add_option("--timeout-ms", timeout_ms, "stop after this long");
  echo->add_flag("--json", json_out, "one JSON object per output line");

  auto * teardown = app.add_subcommand("teardown", "stop and remove a deployment");
  teardown->add_option("id", id, "deployment id")->required();
  teardown->add_flag("--json", json_out, "one JSON object per output line");

  std::string scenario;
  bench::BenchOptions bo;
  double baseline_s = 0.0;
  bool csv = false;
  auto * benchcmd = app.add_subcommand("bench", "offloading benchmark");
  benchcmd->add_option("scenario", scenario, "direct, proxy or edge_only")->required()
  ->check(CLI::IsMember({"direct", "proxy", "edge_only"}));
  benchcmd->add_option("--trials", bo.trials, "requests per scenario");
  benchcmd->add_option("--iterations", bo.iterations, "kernel iterations (0 = calibrate)");
  benchcmd->add_option("--single-worker-s", bo.single_worker_s,
    "calibrated compute time on one edge core");
  benchcmd->add_option("--size", bo.frame_bytes, "request payload bytes");
  benchcmd->add_option("--baseline-s", baseline_s, "edge-only time; skips the baseline run");
  benchcmd->add_flag("--csv", csv, "CSV instead of an aligned table");
  benchcmd->add_flag("--json", json_out, "one JSON object per output line");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError & e) {
    int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  Printer p(out, json_out);
  try {
    if (*launch) {
      return cmd_launch(la, p, err);
    }
    if (*status) {
      return cmd_status(id, p, err);
    }
    if (*topics) {
      return cmd_topics(id, p, err);
    }
    if (*echo) {
      return cmd_echo(id, topic, count, timeout_ms, p, err);
    }
    if (*teardown) {
      return cmd_teardown(id, p, err);
    }
    if (*benchcmd) {
      return cmd_bench(scenario, bo, baseline_s, csv, p, err);
    }
  } catch (const Error & e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception & e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace fog::cli
