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

#include "fog/bench/runner.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <thread>

#include "fog/bench/kernel.hpp"
#include "fog/bench/workload.hpp"
#include "fog/common/error.hpp"
#include "fog/common/time.hpp"
#include "fog/node/node.hpp"
#include "fog/provision/deploy.hpp"
#include "fog/registry/registry.hpp"

namespace fog::bench
{

using namespace std::chrono_literals;

namespace
{

constexpr std::array<std::string_view, 3> kScenarioNames{"direct", "proxy", "edge_only"};

bool topology_ready(const net::Address & registry)
{
  try {
    auto t = registry::query_snapshot(registry);
    auto sensor = t.topics.find(TopicName(kRequestTopic));
    auto result = t.topics.find(TopicName(kResultTopic));
    return sensor != t.topics.end() && !sensor->second.subscribers.empty() &&
           result != t.topics.end() && !result->second.publishers.empty();
  } catch (const Error &) {
    return false;
  }
}

class Driver
{
public:
  Driver(const net::Address & registry, std::size_t frame_bytes)
  : frame_(frame_bytes)
  {
    node::NodeOptions o;
    o.name = "bench_driver";
    o.master = registry;
    o.trace = true;
    node_ = node::Node::create(o);
    pub_ = node_->advertise(TopicName(kRequestTopic));
    sub_ = node_->subscribe(TopicName(kResultTopic), 64);
    for (std::size_t i = 0; i < frame_.size(); ++i) {
      frame_[i] = static_cast<std::uint8_t>(i * 131 + 17);
    }
  }

  ~Driver() {node_->shutdown();}

  /// One request; nullopt when no result arrives in time.
  std::optional<BenchSample> request(std::chrono::milliseconds timeout)
  {
    auto seq = pub_->publish(frame_);
    auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
      auto env = sub_->next(100ms);
      if (!env) {
        continue;
      }
      auto now = wall_ns();
      auto r = decode_result(ByteView(env->payload));
      if (!r || r->request_seq != seq) {
        continue;
      }
      BenchSample s;
      s.seq = seq;
      s.e2e_s = static_cast<double>(now - r->request_stamp_ns) / 1e9;
      s.compute_s = static_cast<double>(r->compute_ns) / 1e9;
      s.network_s = std::max(0.0, s.e2e_s - s.compute_s);
      s.request_hops = r->request_hops;
      s.result_hops = env->trace.size();
      s.value = r->value;
      return s;
    }
    return std::nullopt;
  }

private:
  Bytes frame_;
  std::shared_ptr<node::Node> node_;
  std::shared_ptr<node::Publisher> pub_;
  std::shared_ptr<node::Subscription> sub_;
};

}  // namespace

std::string_view to_string(Scenario s)
{
  return kScenarioNames[static_cast<std::size_t>(s)];
}

std::optional<Scenario> parse_scenario(std::string_view text)
{
  for (std::size_t i = 0; i < kScenarioNames.size(); ++i) {
    if (kScenarioNames[i] == text) {
      return static_cast<Scenario>(i);
    }
  }
  return std::nullopt;
}

std::uint64_t bench_iterations(const BenchOptions & options, const std::string & type)
{
  if (options.iterations > 0) {
    return options.iterations;
  }
  const auto * m = manifest::builtin_catalog().find(type);
  double share = m ? m->core_share : 1.0;
  return calibrate_iterations(options.single_worker_s, share);
}

BenchResult run_benchmark(Scenario scenario, const BenchOptions & options,
  provision::LocalProvider & provider)
{
  BenchResult out;
  out.scenario = scenario;
  out.instance_type = scenario == Scenario::kEdgeOnly ? options.edge_only_type : options.cloud_type;
  const auto * machine = manifest::builtin_catalog().find(out.instance_type);
  if (!machine) {
    throw Error(ErrorCode::kInvalidManifest, "unknown instance type " + out.instance_type);
  }
  out.workers = machine->worker_count;
  out.iterations = bench_iterations(options, options.edge_only_type);

  manifest::LaunchManifest m;
  manifest::CloudGroupSpec g;
  g.name = "compute";
  g.instance_type = out.instance_type;
  g.network = scenario == Scenario::kProxy ? manifest::NetworkMode::kProxy :
    manifest::NetworkMode::kDirect;
  m.cloud_groups["compute"] = g;
  m.nodes.push_back(manifest::NodeSpec{"compute", "fog_bench", "compute",
      {"--iterations", std::to_string(out.iterations)}, manifest::Placement::in("compute"), 0});

  provision::DeployOptions dopts;
  dopts.trace = true;
  dopts.netmon = false;
  auto plan = provision::plan_deployment(m, manifest::builtin_catalog());
  auto rec = provision::deploy(plan, provider, provider, dopts);
  if (rec.status != provision::DeployStatus::kRunning) {
    throw Error(ErrorCode::kStepFailed, "bench deployment failed at step " +
            std::to_string(rec.failed_step) + ": " + rec.error);
  }
  spdlog::info("bench {}: deployment {} running, {} iterations", to_string(scenario), rec.id,
    out.iterations);
  try {
    Driver driver(*rec.edge_registry, options.frame_bytes);
    auto deadline = std::chrono::steady_clock::now() + 20s;
    while (!topology_ready(*rec.edge_registry)) {
      if (std::chrono::steady_clock::now() > deadline) {
        throw Error(ErrorCode::kStepFailed, "compute node never became reachable");
      }
      std::this_thread::sleep_for(50ms);
    }
    // Warm-up: the first request also waits for links to connect.
    std::optional<BenchSample> warm;
    for (int attempt = 0; attempt < 5 && !warm; ++attempt) {
      warm = driver.request(options.request_timeout / 4);
    }
    if (!warm) {
      throw Error(ErrorCode::kStepFailed, "no result for warm-up request");
    }
    for (int i = 0; i < options.trials; ++i) {
      auto s = driver.request(options.request_timeout);
      if (!s) {
        throw Error(ErrorCode::kStepFailed, "request timed out");
      }
      out.samples.push_back(*s);
    }
  } catch (...) {
    provision::teardown(rec, provider, provider);
    throw;
  }
  provision::teardown(rec, provider, provider);

  for (const auto & s : out.samples) {
    out.mean_e2e_s += s.e2e_s;
    out.mean_compute_s += s.compute_s;
    out.mean_network_s += s.network_s;
  }
  if (!out.samples.empty()) {
    auto n = static_cast<double>(out.samples.size());
    out.mean_e2e_s /= n;
    out.mean_compute_s /= n;
    out.mean_network_s /= n;
  }
  return out;
}

TimingRow timing_row(const BenchResult & result, double edge_only_s)
{
  return make_timing_row(std::string(to_string(result.scenario)), edge_only_s,
           result.mean_compute_s, result.mean_network_s);
}

}  // namespace fog::bench
