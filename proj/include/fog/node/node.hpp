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

#ifndef FOG__NODE__NODE_HPP_
#define FOG__NODE__NODE_HPP_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fog/common/backoff.hpp"
#include "fog/common/bytes.hpp"
#include "fog/common/ids.hpp"
#include "fog/net/send_queue.hpp"
#include "fog/net/socket.hpp"
#include "fog/registry/protocol.hpp"
#include "fog/registry/table.hpp"
#include "fog/wire/codec.hpp"

namespace fog::node
{

struct NodeOptions
{
  std::string name{"node"};
  net::Address master{"127.0.0.1", 11311};
  wire::Origin origin{wire::Origin::kEdge};
  /// Stamp the node name as the first trace hop of every publish.
  bool trace{false};
  std::string listen_host{"127.0.0.1"};
  BackoffPolicy backoff{};
  std::chrono::milliseconds heartbeat{2000};
  std::chrono::milliseconds liveness{6000};
  std::chrono::milliseconds request_timeout{2000};
  std::chrono::milliseconds connect_timeout{1000};
  /// Per-subscriber outbound frame bound (drop-oldest).
  std::size_t outbound_capacity{1024};

  /// Reads FOG_MASTER, FOG_NODE_NAME, FOG_ORIGIN and FOG_TRACE.
  static NodeOptions from_env(const std::string & default_name);
};

struct SubscriptionStats
{
  std::uint64_t received{0};
  std::uint64_t delivered{0};
  std::uint64_t dropped{0};
  std::size_t queue_length{0};
  std::size_t max_queue_length{0};
};

class Node;

/// Stream of envelopes for one topic, fed by every connected publisher.
///
/// Queue mode keeps at most `capacity` envelopes and drops the oldest when
/// full. Callback mode runs the callback on the connection's reader thread.
class Subscription
{
public:
  using Callback = std::function<void (const wire::MessageEnvelope &)>;

  Subscription(std::weak_ptr<Node> node, TopicName topic, std::size_t capacity, Callback cb);
  ~Subscription();

  const TopicName & topic() const {return topic_;}
  std::optional<wire::MessageEnvelope> next(std::chrono::milliseconds timeout);
  std::optional<wire::MessageEnvelope> try_next();
  SubscriptionStats stats() const;
  /// Unsubscribes; further envelopes are ignored.
  void close();

private:
  friend class Node;
  void deliver(const wire::MessageEnvelope & env);

  std::weak_ptr<Node> node_;
  TopicName topic_;
  std::size_t capacity_;
  Callback callback_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<wire::MessageEnvelope> queue_;
  SubscriptionStats stats_;
  bool closed_{false};
  int in_callback_{0};
};

class PeerLink;

/// Publishing side of one topic. Safe for concurrent use.
class Publisher
{
public:
  Publisher(std::weak_ptr<Node> node, TopicName topic);
  ~Publisher();

  /// Stamps and sends `payload` to every subscriber; returns the assigned seq (from 1).
  std::uint64_t publish(Bytes payload);
  /// Sends an already-stamped envelope unchanged (used by the bridge).
  void forward(const wire::MessageEnvelope & env);

  const TopicName & topic() const {return topic_;}
  std::size_t link_count() const;
  std::size_t connected_count() const;
  std::uint64_t last_seq() const;
  void close();

private:
  friend class Node;
  void add_link(const registry::Endpoint & target);
  void remove_link(const NodeId & target);
  void stop_links();
  void drop_connections();
  void send(const wire::MessageEnvelope & env);

  std::weak_ptr<Node> node_;
  TopicName topic_;

  mutable std::mutex mu_;
  std::uint64_t seq_{0};
  std::map<NodeId, std::shared_ptr<PeerLink>> links_;
  bool closed_{false};
};

/// A participant in the pub/sub graph: one registry connection, one listen
/// endpoint, any number of publishers and subscriptions.
class Node : public std::enable_shared_from_this<Node>
{
public:
  /// Connects to the registry; throws Error(kRegistryUnavailable) if it cannot.
  static std::shared_ptr<Node> create(NodeOptions options);
  ~Node();
  Node(const Node &) = delete;
  Node & operator=(const Node &) = delete;

  /// Registers as publisher. Advertising a topic twice returns the same handle.
  std::shared_ptr<Publisher> advertise(const TopicName & topic);
  std::shared_ptr<Subscription> subscribe(const TopicName & topic, std::size_t capacity = 16);
  std::shared_ptr<Subscription> subscribe(const TopicName & topic, Subscription::Callback cb);

  /// Point-in-time copy of the registry table. Throws Error(kRegistryUnavailable).
  registry::RegistryTable snapshot_topics();

  void shutdown();

  const NodeId & id() const {return endpoint_.node_id;}
  const registry::Endpoint & endpoint() const {return endpoint_;}
  const NodeOptions & options() const {return options_;}
  bool registry_connected() const;
  /// Reconnect attempts made after losing the registry.
  std::uint64_t reconnect_attempts() const {return reconnect_attempts_;}
  bool gave_up() const {return gave_up_;}
  bool is_shut_down() const {return stopping_;}

  /// Fault injection: closes every node-to-node connection this node holds.
  void drop_peer_connections();

private:
  explicit Node(NodeOptions options);

  friend class Publisher;
  friend class Subscription;

  struct Pending
  {
    std::promise<std::optional<proto::RegistryCtrl>> promise;
    std::optional<TopicName> topic;
    registry::Role role{registry::Role::kPublisher};
  };

  struct Inbound
  {
    explicit Inbound(net::Socket sock)
    : conn(std::move(sock)) {}

    net::FrameConnection conn;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void connect_registry();
  void registry_loop();
  void accept_loop();
  void serve_inbound(std::shared_ptr<Inbound> in);
  void handle_registry_frame(const wire::Frame & frame);
  void drop_registry(const char * why);
  void replay_registrations(const std::shared_ptr<net::FrameConnection> & conn);

  /// Sends SUB/UNSUB; waits for the reply when `wait` and the registry is up.
  void send_registration(const TopicName & topic, registry::Role role, bool add, bool wait);
  std::optional<proto::RegistryCtrl> request(
    wire::FrameKind kind, const std::function<Bytes(std::uint32_t)> & body,
    const std::optional<TopicName> & topic, registry::Role role, bool wait);

  void dispatch(const wire::MessageEnvelope & env);
  void release_subscription(const Subscription * sub);
  void release_publisher(const Publisher * pub);
  void retire_link(std::shared_ptr<PeerLink> link);
  void join_finished();
  bool wait_stop(std::chrono::milliseconds d);

  NodeOptions options_;
  registry::Endpoint endpoint_;
  net::Listener listener_;
  std::atomic<bool> stopping_{false};
  std::atomic<bool> gave_up_{false};
  std::atomic<std::uint64_t> reconnect_attempts_{0};

  // Registry connection and the registrations it must carry.
  mutable std::mutex reg_mu_;
  std::shared_ptr<net::FrameConnection> reg_conn_;
  std::map<TopicName, std::shared_ptr<Publisher>> publishers_;
  std::map<TopicName, std::vector<std::weak_ptr<Subscription>>> subscriptions_;
  std::map<std::uint32_t, std::shared_ptr<Pending>> pending_;
  std::uint32_t next_request_{1};

  std::mutex stop_mu_;
  std::condition_variable stop_cv_;

  std::thread registry_thread_;
  std::thread accept_thread_;

  std::mutex threads_mu_;
  std::vector<std::shared_ptr<Inbound>> inbound_;
  std::vector<std::shared_ptr<PeerLink>> retired_;
};

}  // namespace fog::node

#endif  // FOG__NODE__NODE_HPP_
