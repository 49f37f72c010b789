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

#ifndef FOG__BRIDGE__PROXY_HPP_
#define FOG__BRIDGE__PROXY_HPP_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "fog/bridge/channel.hpp"
#include "fog/bridge/discovery.hpp"
#include "fog/common/backoff.hpp"
#include "fog/net/send_queue.hpp"
#include "fog/netmon/netmon.hpp"
#include "fog/node/node.hpp"

namespace fog::bridge
{

struct ProxyOptions
{
  std::string name{"proxy"};
  /// Side of the deployment this endpoint sits on.
  wire::Origin side{wire::Origin::kEdge};
  ChannelRole role{ChannelRole::kInitiator};
  net::Address registry{"127.0.0.1", 11311};
  /// Initiator: the responder's channel address.
  net::Address peer{"127.0.0.1", 0};
  /// Responder: where to accept the channel.
  std::string listen_host{"127.0.0.1"};
  std::uint16_t listen_port{0};
  Secret secret{};
  TopicPolicy policy{};
  BackoffPolicy backoff{};
  std::chrono::milliseconds handshake_timeout{3000};
  /// The channel counts as down after this long without any frame.
  std::chrono::milliseconds channel_timeout{5000};
  std::size_t queue_capacity{4096};
  bool monitor{true};
  netmon::MonitorOptions monitor_options{};
  std::optional<std::filesystem::path> status_file;
};

struct ProxyStats
{
  std::uint64_t forwarded{0};
  std::uint64_t republished{0};
  std::uint64_t suppressed{0};
  std::uint64_t dropped{0};
  std::uint64_t sessions{0};
  std::uint64_t auth_failures{0};
  /// Totals over every channel session so far.
  KindCounts sent;
  KindCounts received;
};

/// One half of the proxy pair: a node on the local registry plus the secure
/// channel to the other half. Forwards exactly the topics that have a
/// publisher on one side and a subscriber on the other.
class ProxyEndpoint
{
public:
  /// Joins the local registry and, for a responder, binds the channel port.
  explicit ProxyEndpoint(ProxyOptions options);
  ~ProxyEndpoint();
  ProxyEndpoint(const ProxyEndpoint &) = delete;
  ProxyEndpoint & operator=(const ProxyEndpoint &) = delete;

  void start();
  void stop();

  /// Responder only: the bound channel address.
  net::Address channel_address() const;
  BridgeTable bridge_table() const;
  bool channel_up() const;
  ProxyStats stats() const;
  const NodeId & node_id() const {return node_->id();}
  std::optional<Summary> local_summary() const;
  std::optional<Summary> remote_summary() const;
  const netmon::Monitor * monitor() const {return monitor_.get();}
  const ProxyOptions & options() const {return options_;}

private:
  struct Session;
  class ChannelProber;

  void connector_loop();
  void acceptor_loop();
  void run_session(std::shared_ptr<Session> s);
  void install_session(std::shared_ptr<Session> s);
  void discovery_loop();
  void poll_once();
  void reconcile();
  void on_local(const wire::MessageEnvelope & env);
  void on_remote(const wire::Frame & frame, Session & s);
  std::shared_ptr<node::Publisher> inbound_publisher(const TopicName & topic);
  bool send_frame(wire::FrameKind kind, Bytes encoded, std::size_t payload);
  void write_status();
  bool sleep_for(std::chrono::milliseconds d);
  std::string hop_label() const;

  ProxyOptions options_;
  std::shared_ptr<node::Node> node_;
  std::unique_ptr<net::Listener> listener_;

  std::atomic<bool> stopping_{false};
  std::mutex stop_mu_;
  std::condition_variable stop_cv_;
  std::thread channel_thread_;
  std::thread discovery_thread_;

  mutable std::mutex session_mu_;
  std::shared_ptr<Session> session_;
  std::vector<std::shared_ptr<Session>> ended_;
  KindCounts sent_total_;
  KindCounts received_total_;

  mutable std::mutex table_mu_;
  BridgeTable table_;
  std::optional<Summary> local_;
  std::optional<Summary> remote_;
  std::optional<registry::RegistryTable> snapshot_;
  std::map<TopicName, std::shared_ptr<node::Subscription>> outbound_;
  std::map<TopicName, std::shared_ptr<node::Publisher>> inbound_;

  std::atomic<std::uint64_t> forwarded_{0};
  std::atomic<std::uint64_t> republished_{0};
  std::atomic<std::uint64_t> suppressed_{0};
  std::atomic<std::uint64_t> dropped_{0};
  std::atomic<std::uint64_t> sessions_{0};
  std::atomic<std::uint64_t> auth_failures_{0};

  std::unique_ptr<ChannelProber> prober_;
  std::unique_ptr<netmon::Monitor> monitor_;
};

}  // namespace fog::bridge

#endif  // FOG__BRIDGE__PROXY_HPP_
