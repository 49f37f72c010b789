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

#include "fog/registry/registry.hpp"

#include <spdlog/spdlog.h>

#include "fog/common/error.hpp"
#include "fog/common/time.hpp"

namespace fog::registry
{

Registry::Registry(Notifier notifier)
: notifier_(std::move(notifier))
{
}

std::vector<Endpoint> Registry::register_publisher(const TopicName & topic, const Endpoint & who)
{
  return register_endpoint(topic, Role::kPublisher, who);
}

std::vector<Endpoint> Registry::register_subscriber(const TopicName & topic, const Endpoint & who)
{
  return register_endpoint(topic, Role::kSubscriber, who);
}

std::vector<Endpoint> Registry::register_endpoint(
  const TopicName & topic, Role role, const Endpoint & who)
{
  std::lock_guard<std::mutex> lock(mu_);
  bool inserted = table_.add(topic, role, who);
  auto peers = table_.peers(topic, opposite(role));
  if (inserted && notifier_) {
    proto::PeerChange change{true, role, topic, who};
    for (const auto & peer : peers) {
      notifier_(peer.node_id, change);
    }
  }
  return peers;
}

void Registry::unregister(const TopicName & topic, const NodeId & who, Role role)
{
  std::lock_guard<std::mutex> lock(mu_);
  auto it = table_.topics.find(topic);
  if (it == table_.topics.end()) {
    return;
  }
  auto found = it->second.role(role).find(who);
  if (found == it->second.role(role).end()) {
    return;
  }
  Endpoint ep = found->second;
  table_.remove(topic, role, who);
  if (notifier_) {
    proto::PeerChange change{false, role, topic, ep};
    for (const auto & peer : table_.peers(topic, opposite(role))) {
      notifier_(peer.node_id, change);
    }
  }
}

void Registry::expunge(const NodeId & who)
{
  std::lock_guard<std::mutex> lock(mu_);
  auto removed = table_.remove_node(who);
  if (!notifier_) {
    return;
  }
  for (const auto & r : removed) {
    proto::PeerChange change{false, r.role, r.topic, r.endpoint};
    for (const auto & peer : table_.peers(r.topic, opposite(r.role))) {
      notifier_(peer.node_id, change);
    }
  }
}

RegistryTable Registry::snapshot_topics() const
{
  std::lock_guard<std::mutex> lock(mu_);
  return table_;
}

struct RegistryServer::Connection
{
  explicit Connection(net::Socket sock)
  : conn(std::move(sock)) {}

  net::FrameConnection conn;
  net::SendQueue out;
  std::optional<Endpoint> endpoint;
  std::thread reader;
  std::atomic<bool> done{false};
};

RegistryServer::RegistryServer(ServerOptions options)
: options_(std::move(options)),
  listener_(options_.host, options_.port),
  registry_([this](const NodeId & target, const proto::PeerChange & change) {
      notify(target, change);
    })
{
}

RegistryServer::~RegistryServer()
{
  stop();
}

void RegistryServer::start()
{
  if (running_.exchange(true)) {
    return;
  }
  accept_thread_ = std::thread([this] {accept_loop();});
}

void RegistryServer::stop()
{
  if (!running_.exchange(false)) {
    return;
  }
  if (accept_thread_.joinable()) {
    accept_thread_.join();
  }
  listener_.close();
  std::vector<std::shared_ptr<Connection>> conns;
  {
    std::lock_guard<std::mutex> lock(conns_mu_);
    conns.swap(conns_);
    owners_.clear();
  }
  for (auto & c : conns) {
    c->conn.shutdown();
    c->out.close();
  }
  for (auto & c : conns) {
    if (c->reader.joinable()) {
      c->reader.join();
    }
  }
}

std::size_t RegistryServer::connection_count() const
{
  std::lock_guard<std::mutex> lock(conns_mu_);
  return conns_.size();
}

void RegistryServer::accept_loop()
{
  while (running_) {
    auto sock = listener_.accept(std::chrono::milliseconds(100));
    reap_finished();
    if (!sock) {
      continue;
    }
    auto conn = std::make_shared<Connection>(std::move(*sock));
    {
      std::lock_guard<std::mutex> lock(conns_mu_);
      conns_.push_back(conn);
    }
    conn->reader = std::thread([this, conn] {serve(conn);});
  }
}

void RegistryServer::reap_finished()
{
  std::vector<std::shared_ptr<Connection>> finished;
  {
    std::lock_guard<std::mutex> lock(conns_mu_);
    for (auto it = conns_.begin(); it != conns_.end(); ) {
      if ((*it)->done) {
        finished.push_back(*it);
        it = conns_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto & c : finished) {
    if (c->reader.joinable()) {
      c->reader.join();
    }
  }
}

void RegistryServer::serve(std::shared_ptr<Connection> conn)
{
  std::thread writer([conn] {
      try {
        while (true) {
          auto frame = conn->out.pop(std::chrono::milliseconds(200));
          if (!frame) {
            if (conn->out.closed()) {
              return;
            }
            continue;
          }
          conn->conn.write(ByteView(*frame));
        }
      } catch (const Error &) {
        conn->conn.shutdown();
      }
    });

  auto last_seen = std::chrono::steady_clock::now();
  try {
    while (running_) {
      auto frame = conn->conn.read(std::chrono::milliseconds(250));
      auto now = std::chrono::steady_clock::now();
      if (frame) {
        last_seen = now;
        handle_frame(conn, *frame);
      } else if (now - last_seen > options_.liveness_timeout) {
        spdlog::info("registry: connection silent past liveness timeout, dropping");
        break;
      }
    }
  } catch (const Error & e) {
    spdlog::debug("registry: connection ended: {}", e.what());
  }

  conn->out.close();
  conn->conn.shutdown();
  writer.join();

  bool owner = false;
  {
    std::lock_guard<std::mutex> lock(conns_mu_);
    if (conn->endpoint) {
      auto it = owners_.find(conn->endpoint->node_id);
      if (it != owners_.end() && it->second == conn) {
        owners_.erase(it);
        owner = true;
      }
    }
  }
  if (owner && running_) {
    std::lock_guard<std::mutex> order(order_mu_);
    registry_.expunge(conn->endpoint->node_id);
  }
  conn->done = true;
}

void RegistryServer::notify(const NodeId & target, const proto::PeerChange & change)
{
  std::shared_ptr<Connection> conn;
  {
    std::lock_guard<std::mutex> lock(conns_mu_);
    auto it = owners_.find(target);
    if (it == owners_.end()) {
      return;
    }
    conn = it->second;
  }
  auto body = proto::encode_ctrl(change);
  conn->out.push(wire::encode_control(wire::FrameKind::kCtrl, ByteView(body)));
}

void RegistryServer::handle_frame(const std::shared_ptr<Connection> & conn, const wire::Frame & frame)
{
  using wire::FrameKind;
  auto reply = [&conn](const proto::RegistryCtrl & msg) {
      auto body = proto::encode_ctrl(msg);
      conn->out.push(wire::encode_control(FrameKind::kCtrl, ByteView(body)));
    };

  switch (frame.kind) {
    case FrameKind::kHello: {
        auto hello = proto::decode_hello(ByteView(frame.control().bytes));
        if (!hello || !std::holds_alternative<proto::RegistryHello>(*hello)) {
          throw Error(ErrorCode::kIo, "bad HELLO");
        }
        auto ep = std::get<proto::RegistryHello>(*hello).endpoint;
        std::shared_ptr<Connection> previous;
        {
          std::lock_guard<std::mutex> lock(conns_mu_);
          conn->endpoint = ep;
          auto & slot = owners_[ep.node_id];
          if (slot && slot != conn) {
            previous = slot;
          }
          slot = conn;
        }
        if (previous) {
          previous->conn.shutdown();
        }
        break;
      }
    case FrameKind::kSub:
    case FrameKind::kUnsub: {
        auto reg = proto::decode_registration(ByteView(frame.control().bytes));
        if (!reg) {
          throw Error(ErrorCode::kIo, "bad registration");
        }
        auto topic = TopicName::parse(reg->topic);
        if (!topic) {
          reply(proto::RequestError{reg->request_id, "InvalidTopic: " + reg->topic});
          break;
        }
        if (!conn->endpoint) {
          reply(proto::RequestError{reg->request_id, "HELLO required before registration"});
          break;
        }
        std::lock_guard<std::mutex> order(order_mu_);
        if (frame.kind == FrameKind::kSub) {
          auto peers = reg->role == Role::kPublisher ?
            registry_.register_publisher(*topic, *conn->endpoint) :
            registry_.register_subscriber(*topic, *conn->endpoint);
          reply(proto::Registered{reg->request_id, std::move(peers)});
        } else {
          registry_.unregister(*topic, conn->endpoint->node_id, reg->role);
          reply(proto::Ack{reg->request_id});
        }
        break;
      }
    case FrameKind::kCtrl: {
        auto msg = proto::decode_ctrl(ByteView(frame.control().bytes));
        if (msg && std::holds_alternative<proto::SnapshotRequest>(*msg)) {
          auto id = std::get<proto::SnapshotRequest>(*msg).request_id;
          reply(proto::Snapshot{id, registry_.snapshot_topics()});
        }
        break;
      }
    case FrameKind::kPing: {
        conn->out.push(wire::encode_control(FrameKind::kPong, ByteView(frame.control().bytes)));
        break;
      }
    default:
      break;
  }
}

RegistryTable query_snapshot(const net::Address & addr, std::chrono::milliseconds timeout)
{
  try {
    net::FrameConnection conn(net::connect_tcp(addr, timeout));
    auto body = proto::encode_ctrl(proto::SnapshotRequest{1});
    conn.write_control(wire::FrameKind::kCtrl, ByteView(body));
    auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        break;
      }
      auto frame = conn.read(left);
      if (!frame || frame->kind != wire::FrameKind::kCtrl) {
        continue;
      }
      auto msg = proto::decode_ctrl(ByteView(frame->control().bytes));
      if (msg && std::holds_alternative<proto::Snapshot>(*msg)) {
        return std::get<proto::Snapshot>(*msg).table;
      }
    }
  } catch (const Error & e) {
    throw Error(ErrorCode::kRegistryUnavailable, addr.str() + ": " + e.what());
  }
  throw Error(ErrorCode::kRegistryUnavailable, addr.str() + ": snapshot timed out");
}

}  // namespace fog::registry
