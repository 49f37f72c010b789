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

// fog-instance: per-instance supervisor. Leads the instance's process group,
// answers PING on the agent port and refuses connections on ports the
// security rules close.

#include <CLI11.hpp>
#include <poll.h>
#include <spdlog/spdlog.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <memory>
#include <thread>
#include <vector>

#include "fog/common/error.hpp"
#include "fog/common/log.hpp"
#include "fog/common/signals.hpp"
#include "fog/net/socket.hpp"

namespace
{

using namespace std::chrono_literals;

std::atomic<bool> g_stopping{false};

void serve_agent(fog::net::Listener & agent)
{
  while (!g_stopping) {
    auto sock = agent.accept(200ms);
    if (!sock) {
      continue;
    }
    auto conn = std::make_shared<fog::net::FrameConnection>(std::move(*sock));
    std::thread([conn] {
        try {
          while (!g_stopping) {
            auto f = conn->read(200ms);
            if (f && f->kind == fog::wire::FrameKind::kPing) {
              conn->write_control(fog::wire::FrameKind::kPong, fog::ByteView(f->control().bytes));
            }
          }
        } catch (const fog::Error &) {
        }
      }).detach();
  }
}

void refuse_loop(std::vector<fog::net::Listener> & denied)
{
  std::vector<pollfd> fds;
  for (auto & l : denied) {
    fds.push_back(pollfd{l.fd(), POLLIN, 0});
  }
  while (!g_stopping) {
    if (fds.empty()) {
      std::this_thread::sleep_for(200ms);
      continue;
    }
    int n = ::poll(fds.data(), fds.size(), 200);
    if (n <= 0) {
      continue;
    }
    for (auto & p : fds) {
      if (p.revents & POLLIN) {
        int fd = ::accept(p.fd, nullptr, nullptr);
        if (fd >= 0) {
          ::shutdown(fd, SHUT_RDWR);
          ::close(fd);
        }
      }
    }
  }
}

int serve(const std::string & host, std::uint16_t agent_port, const std::vector<std::uint16_t> & deny,
  const std::string & ready_file)
{
  fog::net::Listener agent(host, agent_port);
  std::vector<fog::net::Listener> denied;
  for (auto p : deny) {
    denied.emplace_back(host, p);
  }
  std::thread agent_thread([&] {serve_agent(agent);});
  std::thread refuse_thread([&] {refuse_loop(denied);});
  if (!ready_file.empty()) {
    std::ofstream(ready_file) << ::getpid() << "\n";
  }
  std::printf("instance agent %s, %zu ports closed\n", agent.address().str().c_str(), denied.size());
  std::fflush(stdout);
  fog::wait_termination_signal();
  g_stopping = true;
  agent_thread.join();
  refuse_thread.join();
  return 0;
}

int wait_for(const std::string & address, int timeout_ms)
{
  auto addr = fog::net::parse_address(address);
  if (!addr) {
    std::fprintf(stderr, "bad address '%s'\n", address.c_str());
    return 2;
  }
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (true) {
    try {
      fog::net::connect_tcp(*addr, 500ms);
      std::printf("reachable %s\n", address.c_str());
      return 0;
    } catch (const fog::Error &) {
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      std::printf("unreachable %s\n", address.c_str());
      return 1;
    }
    std::this_thread::sleep_for(50ms);
  }
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"fog instance supervisor"};
  app.require_subcommand(1);
  auto * serve_cmd = app.add_subcommand("serve", "run the supervisor");
  std::string host = "127.0.0.1";
  std::uint16_t agent_port = 0;
  std::vector<std::uint16_t> deny;
  std::string ready_file;
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--agent-port", agent_port)->required();
  serve_cmd->add_option("--deny", deny, "ports to refuse")->delimiter(',');
  serve_cmd->add_option("--ready-file", ready_file);

  auto * wait_cmd = app.add_subcommand("wait", "wait until an address accepts connections");
  std::string address;
  int timeout_ms = 5000;
  wait_cmd->add_option("address", address)->required();
  wait_cmd->add_option("--timeout-ms", timeout_ms);
  CLI11_PARSE(app, argc, argv);

  fog::block_termination_signals();
  fog::init_logging("instance");
  try {
    if (*serve_cmd) {
      return serve(host, agent_port, deny, ready_file);
    }
    return wait_for(address, timeout_ms);
  } catch (const fog::Error & e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}
