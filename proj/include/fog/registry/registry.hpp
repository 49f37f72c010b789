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

#ifndef FOG__REGISTRY__REGISTRY_HPP_
#define FOG__REGISTRY__REGISTRY_HPP_

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "fog/net/send_queue.hpp"
#include "fog/net/socket.hpp"
#include "fog/registry/protocol.hpp"
#include "fog/registry/table.hpp"

namespace fog::registry
{

/// The master's bookkeeping: the table plus change notifications.
///
/// Mutations are serialized by one mutex; notifications are emitted while it
/// is held so every observer sees changes in table order.
class Registry
{
public:
  using Notifier = std::function<void(const NodeId & target, const proto::PeerChange &)>;

  explicit Registry(Notifier notifier = {});

  /// Records `who` as publisher and returns the current subscribers. Existing
  /// subscribers hear about a newly added publisher through the notifier.
  std::vector<Endpoint> register_publisher(const TopicName & topic, const Endpoint & who);
  /// Mirror of register_publisher.
  std::vector<Endpoint> register_subscriber(const TopicName & topic, const Endpoint & who);
  /// No-op when the endpoint is not registered.
  void unregister(const TopicName & topic, const NodeId & who, Role role);
  /// Drops every registration held by a node (connection loss).
  void expunge(const NodeId & who);
  RegistryTable snapshot_topics() const;

private:
  std::vector<Endpoint> register_endpoint(const TopicName & topic, Role role, const Endpoint & who);

  mutable std::mutex mu_;
  RegistryTable table_;
  Notifier notifier_;
};

struct ServerOptions
{
  std::string host{"127.0.0.1"};
  std::uint16_t port{0};
  /// Connections silent for this long are dropped and their entries expunged.
  std::chrono::milliseconds liveness_timeout{6000};
};

/// Stream server exposing a Registry on one port.
class RegistryServer
{
public:
  explicit RegistryServer(ServerOptions options = {});
  ~RegistryServer();
  RegistryServer(const RegistryServer &) = delete;
  RegistryServer & operator=(const RegistryServer &) = delete;

  void start();
  void stop();

  net::Address address() const {return listener_.address();}
  Registry & registry() {return registry_;}
  RegistryTable snapshot_topics() const {return registry_.snapshot_topics();}
  std::size_t connection_count() const;

private:
  struct Connection;

  void accept_loop();
  void serve(std::shared_ptr<Connection> conn);
  void handle_frame(const std::shared_ptr<Connection> & conn, const wire::Frame & frame);
  void notify(const NodeId & target, const proto::PeerChange & change);
  void reap_finished();

  ServerOptions options_;
  net::Listener listener_;
  Registry registry_;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  // Serializes table mutations together with their replies so a client never
  // sees a reply ordered after a later notification.
  std::mutex order_mu_;

  mutable std::mutex conns_mu_;
  std::vector<std::shared_ptr<Connection>> conns_;
  std::map<NodeId, std::shared_ptr<Connection>> owners_;
};

/// One-shot snapshot query against a registry at `addr`. Throws
/// Error(kRegistryUnavailable) when it cannot be reached.
RegistryTable query_snapshot(const net::Address & addr,
  std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));

}  // namespace fog::registry

#endif  // FOG__REGISTRY__REGISTRY_HPP_
