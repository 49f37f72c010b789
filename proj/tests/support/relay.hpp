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

#ifndef SUPPORT__RELAY_HPP_
#define SUPPORT__RELAY_HPP_

#include <poll.h>
#include <sys/socket.h>

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "fog/net/socket.hpp"

namespace fog::testing
{

/// TCP forwarder placed between two endpoints to inject faults: it can sever
/// every connection for a while and record or inject client-to-server bytes.
class TcpRelay
{
public:
  explicit TcpRelay(net::Address target)
  : target_(std::move(target)), listener_("127.0.0.1", 0)
  {
    acceptor_ = std::thread([this] {accept_loop();});
  }

  ~TcpRelay()
  {
    stopping_ = true;
    if (acceptor_.joinable()) {
      acceptor_.join();
    }
    std::vector<std::shared_ptr<Pipe>> pipes;
    {
      std::lock_guard<std::mutex> lock(mu_);
      pipes = pipes_;
    }
    for (auto & p : pipes) {
      p->stop = true;
      if (p->thread.joinable()) {
        p->thread.join();
      }
    }
  }

  net::Address address() const {return listener_.address();}

  /// Drops every live connection and refuses new ones for `outage`.
  void sever(std::chrono::milliseconds outage)
  {
    std::lock_guard<std::mutex> lock(mu_);
    blocked_until_ = std::chrono::steady_clock::now() + outage;
    for (auto & p : pipes_) {
      p->stop = true;
    }
  }

  std::size_t connections_made() const {return made_;}

  /// Client-to-server bytes seen on the most recent connection.
  Bytes recorded_upstream() const
  {
    std::lock_guard<std::mutex> lock(mu_);
    return pipes_.empty() ? Bytes{} : pipes_.back()->upstream;
  }

  /// Writes raw bytes to the server side of the most recent connection.
  void inject_upstream(ByteView bytes)
  {
    std::shared_ptr<Pipe> p;
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (pipes_.empty()) {
        return;
      }
      p = pipes_.back();
    }
    std::lock_guard<std::mutex> lock(p->write_mu);
    p->server.send_all(bytes);
  }

private:
  struct Pipe
  {
    net::Socket client;
    net::Socket server;
    std::thread thread;
    std::atomic<bool> stop{false};
    std::mutex write_mu;
    Bytes upstream;
  };

  void accept_loop()
  {
    while (!stopping_) {
      auto sock = listener_.accept(std::chrono::milliseconds(50));
      if (!sock) {
        continue;
      }
      {
        std::lock_guard<std::mutex> lock(mu_);
        if (std::chrono::steady_clock::now() < blocked_until_) {
          continue;
        }
      }
      auto p = std::make_shared<Pipe>();
      p->client = std::move(*sock);
      try {
        p->server = net::connect_tcp(target_, std::chrono::milliseconds(1000));
      } catch (const Error &) {
        continue;
      }
      ++made_;
      std::lock_guard<std::mutex> lock(mu_);
      pipes_.push_back(p);
      p->thread = std::thread([this, p] {pump(*p);});
    }
  }

  void pump(Pipe & p)
  {
    std::uint8_t buf[65536];
    while (!p.stop && !stopping_) {
      pollfd fds[2] = {{p.client.fd(), POLLIN, 0}, {p.server.fd(), POLLIN, 0}};
      if (::poll(fds, 2, 50) <= 0) {
        continue;
      }
      try {
        if (fds[0].revents) {
          auto n = p.client.recv_some(buf, sizeof(buf));
          if (n == 0) {
            break;
          }
          {
            std::lock_guard<std::mutex> lock(mu_);
            p.upstream.insert(p.upstream.end(), buf, buf + n);
          }
          std::lock_guard<std::mutex> lock(p.write_mu);
          p.server.send_all(ByteView(buf, n));
        }
        if (fds[1].revents) {
          auto n = p.server.recv_some(buf, sizeof(buf));
          if (n == 0) {
            break;
          }
          p.client.send_all(ByteView(buf, n));
        }
      } catch (const Error &) {
        break;
      }
    }
    p.client.shutdown();
    p.server.shutdown();
  }

  net::Address target_;
  net::Listener listener_;
  std::thread acceptor_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> made_{0};
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<Pipe>> pipes_;
  std::chrono::steady_clock::time_point blocked_until_{};
};

}  // namespace fog::testing

#endif  // SUPPORT__RELAY_HPP_
