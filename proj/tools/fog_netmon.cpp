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

// fog-netmon: network monitor for directly connected instances. Probes the
// instance agent and publishes on the monitoring topics of the local registry.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>

#include "fog/common/error.hpp"
#include "fog/common/log.hpp"
#include "fog/common/signals.hpp"
#include "fog/netmon/netmon.hpp"
#include "fog/node/node.hpp"
#include "fog/registry/registry.hpp"

int main(int argc, char ** argv)
{
  CLI::App app{"fog network monitor"};
  std::string agent;
  int interval_ms = 1000;
  app.add_option("--agent", agent, "instance agent host:port")->required();
  app.add_option("--interval-ms", interval_ms, "sample interval");
  CLI11_PARSE(app, argc, argv);

  fog::block_termination_signals();
  fog::init_logging("netmon");
  auto addr = fog::net::parse_address(agent);
  if (!addr) {
    std::fprintf(stderr, "bad agent address '%s'\n", agent.c_str());
    return 2;
  }
  try {
    auto options = fog::node::NodeOptions::from_env("fog_netmon");
    auto master = options.master;
    auto node = fog::node::Node::create(options);
    fog::netmon::AgentProber prober(*addr);
    fog::netmon::MonitorOptions mo;
    mo.interval = std::chrono::milliseconds(interval_ms);
    fog::netmon::Monitor monitor(node, prober, [master] {
        return fog::registry::query_snapshot(master);
      }, mo);
    prober.attach(&monitor);
    monitor.start();
    fog::wait_termination_signal();
    monitor.stop();
    node->shutdown();
  } catch (const fog::Error & e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
