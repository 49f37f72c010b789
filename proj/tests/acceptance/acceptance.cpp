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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "fog/bench/timing.hpp"
#include "fog/bridge/discovery.hpp"
#include "fog/cli/cli.hpp"
#include "fog/common/ids.hpp"
#include "fog/common/kvfile.hpp"
#include "fog/manifest/manifest.hpp"
#include "fog/net/socket.hpp"
#include "fog/netmon/netmon.hpp"
#include "fog/node/node.hpp"
#include "fog/provision/deploy.hpp"
#include "fog/provision/local_provider.hpp"
#include "fog/wire/codec.hpp"
#include "support/faulty_provider.hpp"
#include "support/generators.hpp"
#include "support/proxy_pair.hpp"
#include "support/wait.hpp"

namespace
{

namespace fs = std::filesystem;
using namespace std::chrono_literals;
using Clock = std::chrono::steady_clock;
using fog::Bytes;
using fog::ByteView;
using fog::TopicName;
using fog::testing::wait_until;
using fog::wire::FrameKind;
using fog::wire::Origin;

struct Outcome
{
  bool pass{true};
  std::string detail;

  void require(bool cond, const std::string & what)
  {
    if (!cond && pass) {
      pass = false;
      detail = what;
    }
  }
};

struct Criterion
{
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

fs::path g_work;

fog::provision::LocalProviderOptions provider_options()
{
  fog::provision::LocalProviderOptions o;
  o.sandbox_root = g_work / "sandbox";
  return o;
}

// ------------------------------------------------------------ table arithmetic

Outcome table_arithmetic()
{
  Outcome out;
  std::size_t rows = 0;
  double apartment = 0.0;
  double grasp = 0.0;
  for (const auto & r : fog::bench::published_rows()) {
    auto row = fog::bench::make_timing_row(r.scenario, r.edge_only_s, r.cloud_compute_s,
        r.network_s);
    double total = r.cloud_compute_s + r.network_s;
    out.require(row.total_s == total, r.scenario + " total is not compute + network");
    out.require(row.speedup == r.edge_only_s / total, r.scenario + " speedup is not edge / total");
    out.require(std::abs(row.total_s - r.printed_total_s) <= 0.1 + 1e-9,
      r.scenario + " total far from the printed total");
    if (r.scenario == "Apartment" && r.mode == "vpc") {
      apartment = row.speedup;
    }
    if (r.table == "grasp planning" && r.scenario == "Compressed" && r.mode == "vpc") {
      grasp = row.speedup;
    }
    ++rows;
  }
  out.require(rows == 12, "expected 12 published rows, got " + std::to_string(rows));
  out.require(std::abs(apartment - 34.26) / 34.26 <= 0.005, "Apartment speedup " +
    std::to_string(apartment));
  out.require(std::abs(grasp - 6.08) / 6.08 <= 0.005, "compressed grasp speedup " +
    std::to_string(grasp));
  // The headline figures are the computed speedups truncated to one decimal.
  out.require(std::floor(apartment * 10) / 10 == 34.2, "Apartment headline 34.2x");
  out.require(std::floor(grasp * 10) / 10 == 6.0, "grasp headline 6.0x");
  if (out.pass) {
    out.detail = fmt::format("{} rows; Apartment {:.2f}x, compressed grasp {:.2f}x", rows,
        apartment, grasp);
  }
  return out;
}

// ------------------------------------------------------------ desk speedup

Outcome desk_speedup()
{
  Outcome out;
  std::ostringstream sout;
  std::ostringstream serr;
  int rc = fog::cli::run({"--json", "bench", "direct", "--trials", "3",
        "--single-worker-s", "2.5"}, sout, serr);
  out.require(rc == 0, "fog bench exited " + std::to_string(rc) + ": " + serr.str());
  double edge_compute = 0.0;
  double speedup = 0.0;
  std::istringstream in(sout.str());
  for (std::string line; std::getline(in, line);) {
    auto obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || obj.value("event", "") != "row") {
      continue;
    }
    if (obj["scenario"] == "edge_only") {
      edge_compute = obj["cloud_compute_s"];
    } else if (obj["scenario"] == "direct") {
      speedup = obj["speedup"];
    }
  }
  const auto * big = fog::manifest::builtin_catalog().find("c5.24xlarge");
  out.require(big && big->worker_count == 8, "cloud instance does not have 8 workers");
  out.require(edge_compute >= 2.0, fmt::format("single-worker compute {:.2f} s < 2 s",
    edge_compute));
  out.require(speedup >= 4.0, fmt::format("speedup {:.2f} < 4.0", speedup));
  if (out.pass) {
    out.detail = fmt::format("edge-only compute {:.2f} s, direct speedup {:.2f}x", edge_compute,
        speedup);
  }
  return out;
}

// ------------------------------------------------------------ discovery oracle

enum class Side {kEdge, kCloud};

struct Reg
{
  Side side;
  fog::registry::Role role;
  std::string topic;
  fog::NodeId node;
};

using Flat = std::set<std::pair<std::string, fog::bridge::Direction>>;

Flat brute_force(const std::vector<Reg> & regs)
{
  Flat out;
  for (const auto & p : regs) {
    for (const auto & s : regs) {
      if (p.topic != s.topic || p.role != fog::registry::Role::kPublisher ||
        s.role != fog::registry::Role::kSubscriber || p.side == s.side)
      {
        continue;
      }
      out.insert({p.topic, p.side == Side::kEdge ? fog::bridge::Direction::kEdgeToCloud :
          fog::bridge::Direction::kCloudToEdge});
    }
  }
  return out;
}

Flat discovered(const std::vector<Reg> & regs)
{
  fog::registry::RegistryTable edge;
  fog::registry::RegistryTable cloud;
  for (const auto & r : regs) {
    (r.side == Side::kEdge ? edge : cloud).add(TopicName(r.topic), r.role,
      fog::registry::Endpoint{"n", "127.0.0.1:1", r.node});
  }
  Flat out;
  for (const auto & e : fog::bridge::discover_bridgeable(edge, cloud)) {
    out.insert({e.topic.str(), e.direction});
  }
  return out;
}

Outcome discovery_oracle()
{
  Outcome out;
  using fog::registry::Role;
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<Reg> regs;
    if (mask & 1) {regs.push_back({Side::kEdge, Role::kPublisher, "/t", fog::NodeId::random()});}
    if (mask & 2) {regs.push_back({Side::kEdge, Role::kSubscriber, "/t", fog::NodeId::random()});}
    if (mask & 4) {regs.push_back({Side::kCloud, Role::kPublisher, "/t", fog::NodeId::random()});}
    if (mask & 8) {regs.push_back({Side::kCloud, Role::kSubscriber, "/t", fog::NodeId::random()});}
    out.require(discovered(regs) == brute_force(regs), "placement mask " + std::to_string(mask));
  }
  std::mt19937_64 rng(20260101);
  for (int i = 0; i < 1000 && out.pass; ++i) {
    std::vector<std::string> topics;
    int ntopics = 1 + static_cast<int>(rng() % 8);
    for (int t = 0; t < ntopics; ++t) {
      topics.push_back(fog::testing::random_topic(rng));
    }
    std::vector<fog::NodeId> nodes;
    int nnodes = 1 + static_cast<int>(rng() % 6);
    for (int n = 0; n < nnodes; ++n) {
      nodes.push_back(fog::NodeId::random());
    }
    std::vector<Reg> regs;
    int nregs = static_cast<int>(rng() % 25);
    for (int r = 0; r < nregs; ++r) {
      regs.push_back({(rng() & 1) ? Side::kCloud : Side::kEdge,
          (rng() & 1) ? Role::kSubscriber : Role::kPublisher,
          topics[rng() % topics.size()], nodes[rng() % nodes.size()]});
    }
    out.require(discovered(regs) == brute_force(regs), "random table " + std::to_string(i));
  }
  if (out.pass) {
    out.detail = "16 placements and 1000 random tables agree";
  }
  return out;
}

// ------------------------------------------------------------ deployments

fog::manifest::LaunchManifest cloud_manifest(const std::string & network,
  std::vector<std::string> args)
{
  fog::manifest::LaunchManifest m;
  fog::manifest::CloudGroupSpec g;
  g.name = "far";
  g.instance_type = "t2.micro";
  g.network = network == "proxy" ? fog::manifest::NetworkMode::kProxy :
    fog::manifest::NetworkMode::kDirect;
  m.cloud_groups["far"] = g;
  std::string exec = args.front();
  args.erase(args.begin());
  m.nodes.push_back(fog::manifest::NodeSpec{"remote_" + exec, "fog_bench", exec, args,
      fog::manifest::Placement::in("far"), 0});
  return m;
}

struct Deployment
{
  Deployment(const fog::manifest::LaunchManifest & m, bool trace)
  : provider(provider_options())
  {
    fog::provision::DeployOptions o;
    o.trace = trace;
    o.netmon = false;
    auto plan = fog::provision::plan_deployment(m, fog::manifest::builtin_catalog());
    record = fog::provision::deploy(plan, provider, provider, o);
  }

  ~Deployment()
  {
    fog::provision::teardown(record, provider, provider);
  }

  bool running() const {return record.status == fog::provision::DeployStatus::kRunning;}

  std::shared_ptr<fog::node::Node> node(Origin side, const std::string & name, bool trace)
  {
    fog::node::NodeOptions o;
    o.name = name;
    o.origin = side;
    o.trace = trace;
    o.master = side == Origin::kEdge ? *record.edge_registry : *record.groups.at("far").registry;
    return fog::node::Node::create(o);
  }

  fog::provision::LocalProvider provider;
  fog::provision::DeploymentRecord record;
};

// ------------------------------------------------------------ transparency

Outcome transparency()
{
  Outcome out;
  Deployment d(cloud_manifest("proxy", {"listener", "--topic", "/idle"}), true);
  out.require(d.running(), "deployment failed: " + d.record.error);
  if (!out.pass) {
    return out;
  }
  std::mt19937_64 rng(7);
  constexpr int kTopics = 20;
  constexpr int kMessages = 1000;
  std::vector<std::shared_ptr<fog::node::Node>> pubs_edge;
  std::vector<std::shared_ptr<fog::node::Node>> pubs_cloud;
  for (int i = 0; i < 3; ++i) {
    pubs_edge.push_back(d.node(Origin::kEdge, "pub_edge_" + std::to_string(i), true));
    pubs_cloud.push_back(d.node(Origin::kCloud, "pub_cloud_" + std::to_string(i), true));
  }
  auto sub_edge = d.node(Origin::kEdge, "sub_edge", false);
  auto sub_cloud = d.node(Origin::kCloud, "sub_cloud", false);

  struct TopicRig
  {
    TopicName topic{"/_"};
    Origin source{Origin::kEdge};
    std::string publisher_name;
    std::shared_ptr<fog::node::Publisher> pub;
    std::shared_ptr<fog::node::Subscription> remote;
    std::shared_ptr<fog::node::Subscription> local;
    std::vector<Bytes> sent;
  };
  std::vector<TopicRig> rigs;
  std::set<std::string> used;
  while (static_cast<int>(rigs.size()) < kTopics) {
    auto t = fog::testing::random_topic(rng);
    if (t.rfind("/fogros", 0) == 0 || !used.insert(t).second) {
      continue;
    }
    TopicRig r;
    r.topic = TopicName(t);
    r.source = (rng() & 1) ? Origin::kCloud : Origin::kEdge;
    auto idx = rng() % 3;
    auto & pub_node = r.source == Origin::kEdge ? pubs_edge[idx] : pubs_cloud[idx];
    r.publisher_name = (r.source == Origin::kEdge ? "pub_edge_" : "pub_cloud_") +
      std::to_string(idx);
    r.pub = pub_node->advertise(r.topic);
    r.remote = (r.source == Origin::kEdge ? sub_cloud : sub_edge)->subscribe(r.topic, 4096);
    r.local = (r.source == Origin::kEdge ? sub_edge : sub_cloud)->subscribe(r.topic, 4096);
    rigs.push_back(std::move(r));
  }
  // Warm-up frames (first byte 0) until every bridge delivers end to end.
  std::vector<bool> warm(rigs.size(), false);
  auto deadline = Clock::now() + 30s;
  while (Clock::now() < deadline &&
    std::count(warm.begin(), warm.end(), true) < static_cast<long>(rigs.size()))
  {
    for (std::size_t i = 0; i < rigs.size(); ++i) {
      if (!warm[i]) {
        rigs[i].pub->publish(Bytes{0});
      }
    }
    std::this_thread::sleep_for(200ms);
    for (std::size_t i = 0; i < rigs.size(); ++i) {
      while (auto env = rigs[i].remote->try_next()) {
        warm[i] = true;
      }
    }
  }
  out.require(std::count(warm.begin(), warm.end(), true) == kTopics, "bridges never came up");
  if (!out.pass) {
    return out;
  }
  std::this_thread::sleep_for(300ms);
  for (auto & r : rigs) {
    while (r.remote->try_next()) {}
    while (r.local->try_next()) {}
  }

  std::uniform_int_distribution<std::size_t> size(0, 8192);
  for (int i = 0; i < kMessages; ++i) {
    auto & r = rigs[rng() % rigs.size()];
    Bytes payload = fog::testing::random_bytes(rng, size(rng));
    payload.insert(payload.begin(), 1);
    r.pub->publish(payload);
    r.sent.push_back(std::move(payload));
    if (i % 4 == 0) {
      std::this_thread::sleep_for(2ms);
    }
  }

  std::map<std::size_t, std::vector<fog::wire::MessageEnvelope>> remote_got;
  std::map<std::size_t, std::vector<fog::wire::MessageEnvelope>> local_got;
  auto drain = [&] {
      std::size_t total = 0;
      for (std::size_t i = 0; i < rigs.size(); ++i) {
        while (auto env = rigs[i].remote->try_next()) {
          if (!env->payload.empty() && env->payload[0] == 1) {
            remote_got[i].push_back(std::move(*env));
          }
        }
        while (auto env = rigs[i].local->try_next()) {
          if (!env->payload.empty() && env->payload[0] == 1) {
            local_got[i].push_back(std::move(*env));
          }
        }
        total += remote_got[i].size();
      }
      return total;
    };
  wait_until([&] {return drain() >= kMessages;}, 30s, 50ms);
  std::this_thread::sleep_for(1s);
  std::size_t delivered = drain();
  out.require(delivered == kMessages, fmt::format("{} of {} messages crossed", delivered,
    kMessages));

  const std::string edge_hop = "proxy:edge";
  const std::string cloud_hop = "proxy:cloud";
  for (std::size_t i = 0; i < rigs.size() && out.pass; ++i) {
    const auto & r = rigs[i];
    const auto & got = remote_got[i];
    out.require(got.size() == r.sent.size(), r.topic.str() + " delivered count");
    out.require(local_got[i].size() == r.sent.size(), r.topic.str() + " echoed back or lost");
    for (const auto & env : local_got[i]) {
      out.require(env.trace.size() == 1, r.topic.str() + " local copy crossed the channel");
    }
    std::uint64_t last = 0;
    for (std::size_t k = 0; k < got.size() && out.pass; ++k) {
      const auto & env = got[k];
      out.require(env.payload == r.sent[k], r.topic.str() + " payload or order differs");
      out.require(env.seq > last, r.topic.str() + " seq not increasing");
      last = env.seq;
      out.require(env.origin == r.source, r.topic.str() + " origin rewritten");
      const auto & first = r.source == Origin::kEdge ? edge_hop : cloud_hop;
      const auto & second = r.source == Origin::kEdge ? cloud_hop : edge_hop;
      out.require(env.trace.size() == 3 && env.trace[0] == r.publisher_name &&
        env.trace[1] == first && env.trace[2] == second,
        r.topic.str() + " trace " + fog::join_list(env.trace));
    }
  }
  if (out.pass) {
    out.detail = fmt::format("{} messages on {} topics, byte-identical, in order, one crossing each",
        delivered, kTopics);
  }
  return out;
}

// ------------------------------------------------------------ lazy tunneling

Outcome lazy_tunneling()
{
  Outcome out;
  fog::testing::ProxyPair pair;
  out.require(wait_until([&] {return pair.edge->channel_up() && pair.cloud->channel_up();}, 5s),
    "channel never came up");
  auto talker = pair.node(Origin::kEdge, "talker");
  auto pub = talker->advertise(TopicName("/edge_only"));
  auto listener = pair.node(Origin::kCloud, "listener");
  auto sub = listener->subscribe(TopicName("/cloud_only"), 16);
  auto watcher = pair.node(Origin::kEdge, "watcher");
  auto quiet_until = Clock::now() + 10s;
  while (Clock::now() < quiet_until) {
    pub->publish(Bytes(64, 0x5a));
    std::this_thread::sleep_for(100ms);
  }
  std::uint64_t data = 0;
  std::uint64_t ping = 0;
  for (auto * p : {pair.edge.get(), pair.cloud.get()}) {
    auto st = p->stats();
    data += st.sent.of(FrameKind::kData) + st.received.of(FrameKind::kData);
    ping += st.sent.of(FrameKind::kPing) + st.received.of(FrameKind::kPing);
  }
  out.require(data == 0, std::to_string(data) + " DATA frames on an idle channel");
  out.require(ping == 0, std::to_string(ping) + " PING frames without a monitor subscriber");

  auto lat = watcher->subscribe(TopicName(fog::netmon::kLatencyTopic), 64);
  auto window_end = Clock::now() + 10s;
  int samples = 0;
  while (Clock::now() < window_end) {
    if (auto env = lat->next(50ms)) {
      auto s = fog::netmon::decode_stats(ByteView(env->payload));
      out.require(s.has_value(), "undecodable latency sample");
      ++samples;
    }
  }
  out.require(samples >= 9 && samples <= 11, std::to_string(samples) + " samples in 10 s");
  if (out.pass) {
    out.detail = fmt::format("0 DATA and 0 PING while idle, {} latency samples in 10 s", samples);
  }
  return out;
}

// ------------------------------------------------------------ hop count

Outcome hops_in(const std::string & network, std::size_t expected, std::size_t want,
  std::string & detail)
{
  Outcome out;
  Deployment d(cloud_manifest(network, {"talker", "--topic", "/hops", "--rate", "250"}), true);
  out.require(d.running(), network + " deployment failed: " + d.record.error);
  if (!out.pass) {
    return out;
  }
  auto n = d.node(Origin::kEdge, "hop_counter", false);
  auto sub = n->subscribe(TopicName("/hops"), 4096);
  std::size_t got = 0;
  std::size_t good = 0;
  auto deadline = Clock::now() + 40s;
  while (got < want && Clock::now() < deadline) {
    if (auto env = sub->next(100ms)) {
      ++got;
      good += env->trace.size() == expected ? 1 : 0;
    }
  }
  out.require(got >= want, fmt::format("{}: only {} messages", network, got));
  out.require(good == got, fmt::format("{}: {} of {} with trace length {}", network, good, got,
    expected));
  detail += fmt::format("{}{}/{} at {} hop{}", detail.empty() ? "" : "; ", good, got, expected,
      expected == 1 ? "" : "s");
  return out;
}

Outcome hop_count()
{
  std::string detail;
  auto direct = hops_in("direct", 1, 500, detail);
  if (!direct.pass) {
    return direct;
  }
  auto proxy = hops_in("proxy", 3, 500, detail);
  if (!proxy.pass) {
    return proxy;
  }
  return {true, detail};
}

// ------------------------------------------------------------ lifecycle

std::set<std::uint16_t> block_listeners()
{
  std::set<std::uint16_t> out;
  for (auto p : fog::net::listening_ports()) {
    if (p >= 20000 && p <= 32000) {
      out.insert(p);
    }
  }
  return out;
}

Outcome lifecycle()
{
  Outcome out;
  auto script = g_work / "init.sh";
  std::ofstream(script) << "#!/bin/sh\necho ready\n";
  fog::provision::LocalProvider local(provider_options());
  int faults = 0;
  for (const char * network : {"direct", "proxy"}) {
    for (int step = 1; step <= fog::provision::kStepCount && out.pass; ++step) {
      auto m = cloud_manifest(network, {"listener", "--topic", "/in"});
      m.cloud_groups["far"].setup_script = script.string();
      auto plan = fog::provision::plan_deployment(m, fog::manifest::builtin_catalog());
      fog::testing::FaultyProvider faulty(local, step);
      fog::provision::DeployOptions o;
      o.deployment_id = fog::random_hex(8);
      o.netmon = false;
      auto before = block_listeners();
      auto rec = fog::provision::deploy(plan, faulty, local, o);
      std::string where = fmt::format("{} step {}", network, step);
      out.require(rec.status == fog::provision::DeployStatus::kFailed, where + " not FAILED");
      out.require(rec.failed_step == step, where + " failed at step " +
        std::to_string(rec.failed_step));
      out.require(local.list_instances(o.deployment_id).empty(), where + " left instances");
      out.require(fog::provision::tagged_processes(o.deployment_id).empty(),
        where + " left processes");
      auto after = block_listeners();
      for (auto p : after) {
        out.require(before.count(p) > 0, where + " left port " + std::to_string(p) + " open");
      }
      auto once = fog::provision::teardown(rec, faulty, local);
      auto twice = fog::provision::teardown(once, faulty, local);
      out.require(once.status == fog::provision::DeployStatus::kTornDown, where + " teardown");
      out.require(twice == once, where + " second teardown changed the record");
      ++faults;
    }
  }
  // A healthy deployment tears down completely, and a repeat teardown is a no-op.
  auto m = cloud_manifest("proxy", {"listener", "--topic", "/in"});
  auto plan = fog::provision::plan_deployment(m, fog::manifest::builtin_catalog());
  auto before = block_listeners();
  auto rec = fog::provision::deploy(plan, local, local);
  out.require(rec.status == fog::provision::DeployStatus::kRunning, "healthy deploy failed");
  auto once = fog::provision::teardown(rec, local, local);
  auto twice = fog::provision::teardown(once, local, local);
  out.require(once.status == fog::provision::DeployStatus::kTornDown, "healthy teardown");
  out.require(twice == once, "second teardown changed the record");
  out.require(fog::provision::tagged_processes(rec.id).empty(), "healthy teardown left processes");
  out.require(block_listeners() == before || std::includes(before.begin(), before.end(),
    block_listeners().begin(), block_listeners().end()), "healthy teardown left ports");
  if (out.pass) {
    out.detail = fmt::format("{} injected faults rolled back cleanly; teardown idempotent", faults);
  }
  return out;
}

// ------------------------------------------------------------ rejoin

Outcome rejoin()
{
  Outcome out;
  fog::testing::ProxyPair pair;
  auto talker = pair.node(Origin::kEdge, "talker");
  auto pub = talker->advertise(TopicName("/stream"));
  auto listener = pair.node(Origin::kCloud, "listener");
  auto sub = listener->subscribe(TopicName("/stream"), 1024);
  out.require(wait_until([&] {return pub->connected_count() == 1;}, 5s), "bridge never formed");
  if (!out.pass) {
    return out;
  }
  std::atomic<bool> run{true};
  std::thread producer([&] {
      while (run) {
        pub->publish(Bytes{'t', 'i', 'c', 'k'});
        std::this_thread::sleep_for(20ms);
      }
    });
  std::uint64_t last = 0;
  bool monotonic = true;
  auto take = [&](Clock::time_point until, std::uint64_t stop_after) {
      std::size_t got = 0;
      while (Clock::now() < until) {
        if (auto env = sub->next(20ms)) {
          monotonic &= env->seq > last;
          last = env->seq;
          ++got;
          if (stop_after && last > stop_after) {
            break;
          }
        }
      }
      return got;
    };
  auto before_gap = take(Clock::now() + 1s, 0);
  pair.relay->sever(2s);
  auto severed = Clock::now();
  take(severed + 2s, 0);
  auto mark = last;
  take(severed + 10s, mark + 5);
  auto resumed_after = Clock::now() - severed;
  run = false;
  producer.join();
  out.require(before_gap > 0, "no delivery before the outage");
  out.require(last > mark + 5, "delivery did not resume within 10 s");
  out.require(monotonic, "per-publisher seqs not strictly increasing");
  out.require(pair.edge->stats().sessions >= 2, "channel never re-established");
  if (out.pass) {
    out.detail = fmt::format("resumed {:.1f} s after a 2 s outage; seqs strictly increasing",
        std::chrono::duration<double>(resumed_after).count());
  }
  return out;
}

// ------------------------------------------------------------ codec fuzz

Outcome codec_fuzz()
{
  Outcome out;
  std::mt19937_64 rng(99);
  std::vector<Bytes> seeds;
  for (int i = 0; i < 64; ++i) {
    seeds.push_back(fog::wire::encode_data(fog::testing::random_envelope(rng, 256)));
  }
  std::size_t ok = 0;
  std::size_t typed = 0;
  for (int i = 0; i < 100000; ++i) {
    Bytes b;
    if (i % 2 == 0) {
      b = fog::testing::random_bytes(rng, rng() % 300);
    } else {
      b = seeds[rng() % seeds.size()];
      int flips = 1 + static_cast<int>(rng() % 6);
      for (int f = 0; f < flips && !b.empty(); ++f) {
        b[rng() % b.size()] = static_cast<std::uint8_t>(rng());
      }
      b.resize(rng() % (b.size() + 8));
    }
    auto r = fog::wire::decode_frame(ByteView(b));
    if (r.ok()) {
      ++ok;
      out.require(r.frame.has_value() && r.consumed <= b.size(), "inconsistent decode");
    } else {
      ++typed;
      out.require(!fog::wire::to_string(r.status).empty(), "untyped decode error");
    }
    fog::wire::FrameBuffer fb;
    fb.append(ByteView(b));
    for (int k = 0; k < 4; ++k) {
      auto n = fb.next();
      if (!n.ok()) {
        break;
      }
    }
  }
  for (int i = 0; i < 10000 && out.pass; ++i) {
    auto env = fog::testing::random_envelope(rng, 4096);
    auto bytes = fog::wire::encode_data(env);
    out.require(bytes.size() == fog::wire::encoded_size(env), "encoded_size mismatch");
    auto r = fog::wire::decode_frame(ByteView(bytes));
    out.require(r.ok() && r.consumed == bytes.size() && r.frame->kind == FrameKind::kData &&
      r.frame->envelope() == env, "round trip " + std::to_string(i));
  }
  if (out.pass) {
    out.detail = fmt::format("100000 inputs: {} decoded, {} typed errors; 10000 round trips",
        ok, typed);
  }
  return out;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"fog acceptance criteria"};
  std::vector<std::string> only;
  app.add_option("criteria", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(spdlog::level::warn);
  g_work = fs::temp_directory_path() / ("fog-acceptance-" + fog::random_hex(8));
  fs::create_directories(g_work / "sandbox");
  fs::create_directories(g_work / "state");
  ::setenv("FOG_SANDBOX_DIR", (g_work / "sandbox").c_str(), 1);
  ::setenv("FOG_STATE_DIR", (g_work / "state").c_str(), 1);

  std::vector<Criterion> criteria{
    {"table_arithmetic", 1.0, table_arithmetic},
    {"desk_speedup", 90.0, desk_speedup},
    {"discovery_oracle", 5.0, discovery_oracle},
    {"transparency", 60.0, transparency},
    {"lazy_tunneling", 30.0, lazy_tunneling},
    {"hop_count", 0.0, hop_count},
    {"deployment_lifecycle", 60.0, lifecycle},
    {"rejoin", 30.0, rejoin},
    {"codec_fuzz", 30.0, codec_fuzz},
  };
  int failed = 0;
  for (const auto & c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) {
      continue;
    }
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception & e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (o.pass && c.budget_s > 0.0 && secs > c.budget_s) {
      o = {false, fmt::format("took {:.1f} s, budget {:.0f} s", secs, c.budget_s)};
    }
    std::printf("%s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.name.c_str(),
      o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::error_code ec;
  fs::remove_all(g_work, ec);
  return failed == 0 ? 0 : 1;
}
