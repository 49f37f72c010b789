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

// fog-proxy: one half of the bridge proxy pair.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fog/bridge/proxy.hpp"
#include "fog/common/error.hpp"
#include "fog/common/kvfile.hpp"
#include "fog/common/log.hpp"
#include "fog/common/signals.hpp"

namespace
{

fog::net::Address address_arg(const std::string & text, const char * what)
{
  auto a = fog::net::parse_address(text);
  if (!a) {
    throw CLI::ValidationError(what, "expected host:port, got '" + text + "'");
  }
  return *a;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"fog bridge proxy"};
  std::string side = "edge";
  std::string role = "initiator";
  std::string registry = "127.0.0.1:11311";
  std::string peer;
  std::string secret_file;
  std::string topics;
  std::string status_file;
  std::string name;
  std::uint16_t listen_port = 0;
  int poll_ms = 500;
  int monitor_ms = 1000;
  bool no_monitor = false;
  app.add_option("--side", side, "edge or cloud")->check(CLI::IsMember({"edge", "cloud"}));
  app.add_option("--role", role, "initiator or responder")->check(CLI::IsMember({"initiator", "responder"}));
  app.add_option("--registry", registry, "local registry host:port");
  app.add_option("--peer", peer, "responder channel host:port (initiator)");
  app.add_option("--listen-port", listen_port, "channel port (responder)");
  app.add_option("--secret-file", secret_file, "file holding the hex shared secret")->required();
  app.add_option("--topics", topics, "explicit topic list (comma separated); default automatic");
  app.add_option("--status-file", status_file, "status file rewritten every poll");
  app.add_option("--name", name, "proxy node name");
  app.add_option("--poll-ms", poll_ms, "discovery poll interval");
  app.add_option("--monitor-ms", monitor_ms, "network monitor interval");
  app.add_flag("--no-monitor", no_monitor, "disable the network monitor");
  CLI11_PARSE(app, argc, argv);

  fog::block_termination_signals();
  fog::init_logging("proxy");
  try {
    fog::bridge::ProxyOptions o;
    o.side = side == "edge" ? fog::wire::Origin::kEdge : fog::wire::Origin::kCloud;
    o.role = role == "initiator" ? fog::bridge::ChannelRole::kInitiator :
      fog::bridge::ChannelRole::kResponder;
    o.name = name.empty() ? "fog_proxy_" + side : name;
    o.registry = address_arg(registry, "--registry");
    if (o.role == fog::bridge::ChannelRole::kInitiator) {
      o.peer = address_arg(peer, "--peer");
    }
    o.listen_port = listen_port;
    std::ifstream in(secret_file);
    std::string hex;
    in >> hex;
    o.secret = fog::bridge::secret_from_hex(hex);
    std::chrono::milliseconds poll(poll_ms);
    if (topics.empty()) {
      o.policy = fog::bridge::TopicPolicy::automatic(poll);
    } else {
      std::vector<fog::TopicName> list;
      for (const auto & t : fog::split_list(topics, 0)) {
        list.emplace_back(t);
      }
      o.policy = fog::bridge::TopicPolicy::explicit_list(list, poll);
    }
    o.monitor = !no_monitor;
    o.monitor_options.interval = std::chrono::milliseconds(monitor_ms);
    if (!status_file.empty()) {
      o.status_file = status_file;
    }
    fog::bridge::ProxyEndpoint proxy(o);
    proxy.start();
    if (o.role == fog::bridge::ChannelRole::kResponder) {
      std::printf("listening %s\n", proxy.channel_address().str().c_str());
    }
    std::printf("proxy %s up\n", side.c_str());
    std::fflush(stdout);
    fog::wait_termination_signal();
    proxy.stop();
  } catch (const fog::Error & e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const CLI::Error & e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
  return 0;
}
