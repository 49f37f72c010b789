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

#include "fog/node/node.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>

#include "fog/common/error.hpp"
#include "fog/common/time.hpp"

namespace fog::node
{

using registry::Endpoint;
using registry::Role;
using wire::FrameKind;
using wire::MessageEnvelope;

namespace
{

constexpr std::chrono::milliseconds kPoll{100};

}  // namespace

NodeOptions NodeOptions::from_env(const std::string & default_name)
{
  NodeOptions o;
  o.name = default_name;
  if (const char * v = std::getenv("FOG_NODE_NAME")) {
    o.name = v;
  }
  if (const char * v = std::getenv("FOG_MASTER")) {
    auto addr = net::parse_address(v);
    if (!addr) {
      throw Error(ErrorCode::kRegistryUnavailable, std::string("bad FOG_MASTER '") + v + "'");
    }
    o.master = *addr;
  }
  if (const char * v = std::getenv("FOG_ORIGIN")) {
    if (auto origin = wire::parse_origin(v)) {
      o.origin = *origin;
    }
  }
  if (const char * v = std::getenv("FOG_TRACE")) {
    o.trace = std::string(v) == "1";
  }
  return o;
}

// ---------------------------------------------------------------------------
// PeerLink: one publisher -> subscriber-node stream with its writer thread.

class PeerLink
{
public:
  PeerLink(Endpoint target, TopicName topic, Endpoint self, const NodeOptions & options)
  : target_(std::move(target)), topic_(std::move(topic)), self_(std::move(self)),
    options_(options), queue_(options.outbound_capacity)
  {
    thread_ = std::thread([this] {run();});
  }

  ~PeerLink()
  {
    stop();
    join();
  }

  void push(Bytes frame) {queue_.push(std::move(frame));}
  bool connected() const {return connected_;}
  bool finished() const {return finished_;}
  const Endpoint & target() const {return target_;}

  void stop()
  {
    stop_ = true;
    queue_.close();
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (conn_) {
        conn_->shutdown();
      }
    }
    cv_.notify_all();
  }

  void join()
  {
    if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) {
      thread_.join();
    }
  }

  void drop()
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (conn_) {
      conn_->shutdown();
    }
  }

private:
  void run()
  {
    Backoff backoff(options_.backoff);
    auto addr = net::parse_address(target_.address);
    while (addr && !stop_) {
      try {
        auto conn = std::make_shared<net::FrameConnection>(
          net::connect_tcp(*addr, options_.connect_timeout));
        auto hello = proto::encode_hello(proto::PeerHello{topic_, self_});
        conn->write_control(FrameKind::kHello, ByteView(hello));
        {
          std::lock_guard<std::mutex> lock(mu_);
          conn_ = conn;
        }
        connected_ = true;
        backoff.reset();
        while (!stop_) {
          auto frame = queue_.pop(kPoll);
          if (frame) {
            conn->write(ByteView(*frame));
          } else if (conn->socket().wait_readable(std::chrono::milliseconds(0))) {
            std::uint8_t b = 0;
            if (conn->socket().recv_some(&b, 1) == 0) {
              throw Error(ErrorCode::kIo, "subscriber closed connection");
            }
          }
        }
      } catch (const Error & e) {
        spdlog::debug("link {} -> {}: {}", topic_.str(), target_.address, e.what());
      }
      connected_ = false;
      {
        std::lock_guard<std::mutex> lock(mu_);
        conn_.reset();
      }
      queue_.clear();
      if (stop_) {
        break;
      }
      auto delay = backoff.next();
      if (!delay) {
        break;
      }
      std::unique_lock<std::mutex> lock(mu_);
      cv_.wait_for(lock, *delay, [this] {return stop_.load();});
    }
    finished_ = true;
  }

  Endpoint target_;
  TopicName topic_;
  Endpoint self_;
  NodeOptions options_;
  net::SendQueue queue_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::shared_ptr<net::FrameConnection> conn_;
  std::atomic<bool> stop_{false};
  std::atomic<bool> connected_{false};
  std::atomic<bool> finished_{false};
  std::thread thread_;
};

// ---------------------------------------------------------------------------
// Subscription

Subscription::Subscription(
  std::weak_ptr<Node> node, TopicName topic, std::size_t capacity, Callback cb)
: node_(std::move(node)), topic_(std::move(topic)), capacity_(capacity), callback_(std::move(cb))
{
}

namespace
{
thread_local const Subscription * tl_in_callback = nullptr;
}  // namespace

Subscription::~Subscription()
{
  close();
}

void Subscription::deliver(const MessageEnvelope & env)
{
  if (callback_) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (closed_) {
        return;
      }
      ++stats_.received;
      ++stats_.delivered;
      ++in_callback_;
    }
    struct Done
    {
      Subscription * self;
      ~Done()
      {
        std::lock_guard<std::mutex> lock(self->mu_);
        --self->in_callback_;
        self->cv_.notify_all();
      }
    } done{this};
    const Subscription * outer = tl_in_callback;
    tl_in_callback = this;
    struct Restore
    {
      const Subscription * prev;
      ~Restore() {tl_in_callback = prev;}
    } restore{outer};
    callback_(env);
    return;
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) {
      return;
    }
    ++stats_.received;
    if (queue_.size() >= capacity_) {
      queue_.pop_front();
      ++stats_.dropped;
    }
    queue_.push_back(env);
    stats_.max_queue_length = std::max(stats_.max_queue_length, queue_.size());
  }
  cv_.notify_one();
}

std::optional<MessageEnvelope> Subscription::next(std::chrono::milliseconds timeout)
{
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait_for(lock, timeout, [this] {return closed_ || !queue_.empty();});
  if (queue_.empty()) {
    return std::nullopt;
  }
  MessageEnvelope env = std::move(queue_.front());
  queue_.pop_front();
  ++stats_.delivered;
  return env;
}

std::optional<MessageEnvelope> Subscription::try_next()
{
  return next(std::chrono::milliseconds(0));
}

SubscriptionStats Subscription::stats() const
{
  std::lock_guard<std::mutex> lock(mu_);
  auto s = stats_;
  s.queue_length = queue_.size();
  return s;
}

void Subscription::close()
{
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) {
      return;
    }
    closed_ = true;
  }
  cv_.notify_all();
  if (auto node = node_.lock()) {
    node->release_subscription(this);
  }
  // Wait out a callback running on another thread.
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [this] {
      return in_callback_ == (tl_in_callback == this ? 1 : 0);
    });
}

// ---------------------------------------------------------------------------
// Publisher

Publisher::Publisher(std::weak_ptr<Node> node, TopicName topic)
: node_(std::move(node)), topic_(std::move(topic))
{
}

Publisher::~Publisher()
{
  stop_links();
}

std::uint64_t Publisher::publish(Bytes payload)
{
  if (payload.size() > wire::kMaxPayload) {
    throw Error(ErrorCode::kOversizePayload,
            "payload of " + std::to_string(payload.size()) + " bytes exceeds limit");
  }
  auto node = node_.lock();
  if (!node || node->is_shut_down()) {
    throw Error(ErrorCode::kNodeShutDown, "node is shut down");
  }
  MessageEnvelope env;
  env.topic = topic_;
  env.publisher_id = node->id();
  env.origin = node->options().origin;
  env.payload = std::move(payload);
  if (node->options().trace) {
    env.trace.push_back(node->options().name.substr(0, 255));
  }
  std::lock_guard<std::mutex> lock(mu_);
  if (closed_) {
    throw Error(ErrorCode::kNodeShutDown, "publisher closed");
  }
  env.seq = ++seq_;
  env.timestamp_ns = wall_ns();
  auto frame = wire::encode_data(env);
  for (auto & [id, link] : links_) {
    link->push(frame);
  }
  return env.seq;
}

void Publisher::forward(const MessageEnvelope & env)
{
  auto node = node_.lock();
  if (!node || node->is_shut_down()) {
    throw Error(ErrorCode::kNodeShutDown, "node is shut down");
  }
  auto frame = wire::encode_data(env);
  std::lock_guard<std::mutex> lock(mu_);
  if (closed_) {
    return;
  }
  seq_ = std::max(seq_, env.seq);
  for (auto & [id, link] : links_) {
    link->push(frame);
  }
}

std::size_t Publisher::link_count() const
{
  std::lock_guard<std::mutex> lock(mu_);
  return links_.size();
}

std::size_t Publisher::connected_count() const
{
  std::lock_guard<std::mutex> lock(mu_);
  return static_cast<std::size_t>(std::count_if(links_.begin(), links_.end(),
         [](const auto & kv) {return kv.second->connected();}));
}

std::uint64_t Publisher::last_seq() const
{
  std::lock_guard<std::mutex> lock(mu_);
  return seq_;
}

void Publisher::close()
{
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) {
      return;
    }
    closed_ = true;
  }
  if (auto node = node_.lock()) {
    node->release_publisher(this);
  }
  stop_links();
}

void Publisher::add_link(const Endpoint & target)
{
  auto node = node_.lock();
  if (!node) {
    return;
  }
  std::shared_ptr<PeerLink> replaced;
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) {
      return;
    }
    auto it = links_.find(target.node_id);
    if (it != links_.end()) {
      if (it->second->target().address == target.address && !it->second->finished()) {
        return;
      }
      replaced = it->second;
      links_.erase(it);
    }
    links_.emplace(target.node_id,
      std::make_shared<PeerLink>(target, topic_, node->endpoint(), node->options()));
  }
  if (replaced) {
    node->retire_link(replaced);
  }
}

void Publisher::remove_link(const NodeId & target)
{
  std::shared_ptr<PeerLink> link;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = links_.find(target);
    if (it == links_.end()) {
      return;
    }
    link = it->second;
    links_.erase(it);
  }
  if (auto node = node_.lock()) {
    node->retire_link(link);
  } else {
    link->stop();
  }
}

void Publisher::stop_links()
{
  std::map<NodeId, std::shared_ptr<PeerLink>> links;
  {
    std::lock_guard<std::mutex> lock(mu_);
    links.swap(links_);
  }
  for (auto & [id, link] : links) {
    link->stop();
  }
  for (auto & [id, link] : links) {
    link->join();
  }
}

void Publisher::drop_connections()
{
  std::lock_guard<std::mutex> lock(mu_);
  for (auto & [id, link] : links_) {
    link->drop();
  }
}

// ---------------------------------------------------------------------------
// Node

Node::Node(NodeOptions options)
: options_(std::move(options)), listener_(net::Listener::bind_from_env(options_.listen_host))
{
  endpoint_.node_name = options_.name;
  endpoint_.node_id = NodeId::random();
  endpoint_.address = listener_.address().str();
}

std::shared_ptr<Node> Node::create(NodeOptions options)
{
  std::shared_ptr<Node> node(new Node(std::move(options)));
  try {
    node->connect_registry();
  } catch (const Error & e) {
    node->listener_.close();
    throw Error(ErrorCode::kRegistryUnavailable,
            "registry " + node->options_.master.str() + ": " + e.what());
  }
  node->accept_thread_ = std::thread([raw = node.get()] {raw->accept_loop();});
  node->registry_thread_ = std::thread([raw = node.get()] {raw->registry_loop();});
  return node;
}

Node::~Node()
{
  shutdown();
}

void Node::connect_registry()
{
  auto conn = std::make_shared<net::FrameConnection>(
    net::connect_tcp(options_.master, options_.connect_timeout));
  auto hello = proto::encode_hello(proto::RegistryHello{endpoint_});
  conn->write_control(FrameKind::kHello, ByteView(hello));
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    reg_conn_ = conn;
  }
  replay_registrations(conn);
}

void Node::replay_registrations(const std::shared_ptr<net::FrameConnection> & conn)
{
  std::vector<std::pair<TopicName, Role>> regs;
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    for (const auto & [topic, pub] : publishers_) {
      regs.emplace_back(topic, Role::kPublisher);
    }
    for (const auto & [topic, subs] : subscriptions_) {
      regs.emplace_back(topic, Role::kSubscriber);
    }
  }
  (void)conn;
  for (const auto & [topic, role] : regs) {
    send_registration(topic, role, true, false);
  }
}

bool Node::registry_connected() const
{
  std::lock_guard<std::mutex> lock(reg_mu_);
  return reg_conn_ != nullptr;
}

bool Node::wait_stop(std::chrono::milliseconds d)
{
  std::unique_lock<std::mutex> lock(stop_mu_);
  return stop_cv_.wait_for(lock, d, [this] {return stopping_.load();});
}

void Node::drop_registry(const char * why)
{
  std::map<std::uint32_t, std::shared_ptr<Pending>> pending;
  std::shared_ptr<net::FrameConnection> conn;
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    conn.swap(reg_conn_);
    pending.swap(pending_);
  }
  if (conn) {
    spdlog::info("node {}: registry connection lost ({})", options_.name, why);
    conn->shutdown();
  }
  for (auto & [id, p] : pending) {
    p->promise.set_value(std::nullopt);
  }
}

void Node::registry_loop()
{
  Backoff backoff(options_.backoff);
  auto last_rx = std::chrono::steady_clock::now();
  auto last_ping = last_rx;
  while (!stopping_) {
    join_finished();
    std::shared_ptr<net::FrameConnection> conn;
    {
      std::lock_guard<std::mutex> lock(reg_mu_);
      conn = reg_conn_;
    }
    if (!conn) {
      auto delay = backoff.next();
      if (!delay) {
        spdlog::warn("node {}: giving up on registry {}", options_.name, options_.master.str());
        gave_up_ = true;
        return;
      }
      if (wait_stop(*delay)) {
        return;
      }
      ++reconnect_attempts_;
      try {
        connect_registry();
        backoff.reset();
        last_rx = last_ping = std::chrono::steady_clock::now();
        spdlog::info("node {}: rejoined registry {}", options_.name, options_.master.str());
      } catch (const Error & e) {
        spdlog::debug("node {}: reconnect failed: {}", options_.name, e.what());
      }
      continue;
    }
    try {
      auto frame = conn->read(kPoll);
      auto now = std::chrono::steady_clock::now();
      if (frame) {
        last_rx = now;
        handle_registry_frame(*frame);
      }
      if (now - last_ping >= options_.heartbeat) {
        last_ping = now;
        auto ping = proto::encode_ping(proto::Ping{0, wall_ns()});
        conn->write_control(FrameKind::kPing, ByteView(ping));
      }
      if (now - last_rx > options_.liveness) {
        drop_registry("liveness timeout");
      }
    } catch (const Error & e) {
      if (!stopping_) {
        drop_registry(e.what());
      }
    }
  }
}

void Node::handle_registry_frame(const wire::Frame & frame)
{
  if (frame.kind != FrameKind::kCtrl) {
    return;
  }
  auto msg = proto::decode_ctrl(ByteView(frame.control().bytes));
  if (!msg) {
    return;
  }
  auto take_pending = [this](std::uint32_t id) {
      std::lock_guard<std::mutex> lock(reg_mu_);
      auto it = pending_.find(id);
      if (it == pending_.end()) {
        return std::shared_ptr<Pending>{};
      }
      auto p = it->second;
      pending_.erase(it);
      return p;
    };
  auto publisher_for = [this](const TopicName & topic) {
      std::lock_guard<std::mutex> lock(reg_mu_);
      auto it = publishers_.find(topic);
      return it == publishers_.end() ? std::shared_ptr<Publisher>{} : it->second;
    };

  if (auto * reg = std::get_if<proto::Registered>(&*msg)) {
    auto p = take_pending(reg->request_id);
    if (p && p->topic && p->role == Role::kPublisher) {
      if (auto pub = publisher_for(*p->topic)) {
        for (const auto & ep : reg->peers) {
          pub->add_link(ep);
        }
      }
    }
    if (p) {
      p->promise.set_value(*msg);
    }
  } else if (auto * change = std::get_if<proto::PeerChange>(&*msg)) {
    if (change->role != Role::kSubscriber) {
      return;
    }
    if (auto pub = publisher_for(change->topic)) {
      if (change->added) {
        pub->add_link(change->endpoint);
      } else {
        pub->remove_link(change->endpoint.node_id);
      }
    }
  } else if (auto * ack = std::get_if<proto::Ack>(&*msg)) {
    if (auto p = take_pending(ack->request_id)) {
      p->promise.set_value(*msg);
    }
  } else if (auto * snap = std::get_if<proto::Snapshot>(&*msg)) {
    if (auto p = take_pending(snap->request_id)) {
      p->promise.set_value(*msg);
    }
  } else if (auto * err = std::get_if<proto::RequestError>(&*msg)) {
    spdlog::warn("node {}: registry error: {}", options_.name, err->message);
    if (auto p = take_pending(err->request_id)) {
      p->promise.set_value(*msg);
    }
  }
}

std::optional<proto::RegistryCtrl> Node::request(
  FrameKind kind, const std::function<Bytes(std::uint32_t)> & body,
  const std::optional<TopicName> & topic, Role role, bool wait)
{
  auto pending = std::make_shared<Pending>();
  pending->topic = topic;
  pending->role = role;
  auto future = pending->promise.get_future();
  std::shared_ptr<net::FrameConnection> conn;
  std::uint32_t id = 0;
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    conn = reg_conn_;
    if (!conn) {
      return std::nullopt;
    }
    id = next_request_++;
    pending_[id] = pending;
  }
  try {
    conn->write_control(kind, ByteView(body(id)));
  } catch (const Error & e) {
    drop_registry(e.what());
    return std::nullopt;
  }
  if (!wait) {
    return std::nullopt;
  }
  if (future.wait_for(options_.request_timeout) != std::future_status::ready) {
    return std::nullopt;
  }
  return future.get();
}

void Node::send_registration(const TopicName & topic, Role role, bool add, bool wait)
{
  request(add ? FrameKind::kSub : FrameKind::kUnsub,
    [&](std::uint32_t id) {
      return proto::encode_registration(proto::Registration{id, role, topic.str()});
    },
    topic, role, wait);
}

std::shared_ptr<Publisher> Node::advertise(const TopicName & topic)
{
  if (stopping_) {
    throw Error(ErrorCode::kNodeShutDown, "node is shut down");
  }
  std::shared_ptr<Publisher> pub;
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    auto it = publishers_.find(topic);
    if (it != publishers_.end()) {
      return it->second;
    }
    pub = std::make_shared<Publisher>(weak_from_this(), topic);
    publishers_.emplace(topic, pub);
  }
  send_registration(topic, Role::kPublisher, true, true);
  return pub;
}

std::shared_ptr<Subscription> Node::subscribe(const TopicName & topic, std::size_t capacity)
{
  if (capacity == 0) {
    throw Error(ErrorCode::kInvalidTopic, "subscription capacity must be at least 1");
  }
  if (stopping_) {
    throw Error(ErrorCode::kNodeShutDown, "node is shut down");
  }
  auto sub = std::make_shared<Subscription>(weak_from_this(), topic, capacity, nullptr);
  bool first = false;
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    auto & list = subscriptions_[topic];
    first = list.empty();
    list.push_back(sub);
  }
  if (first) {
    send_registration(topic, Role::kSubscriber, true, true);
  }
  return sub;
}

std::shared_ptr<Subscription> Node::subscribe(const TopicName & topic, Subscription::Callback cb)
{
  if (stopping_) {
    throw Error(ErrorCode::kNodeShutDown, "node is shut down");
  }
  auto sub = std::make_shared<Subscription>(weak_from_this(), topic, 1, std::move(cb));
  bool first = false;
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    auto & list = subscriptions_[topic];
    first = list.empty();
    list.push_back(sub);
  }
  if (first) {
    send_registration(topic, Role::kSubscriber, true, true);
  }
  return sub;
}

void Node::release_subscription(const Subscription * sub)
{
  bool last = false;
  TopicName topic = sub->topic();
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    auto it = subscriptions_.find(topic);
    if (it == subscriptions_.end()) {
      return;
    }
    auto & list = it->second;
    list.erase(std::remove_if(list.begin(), list.end(), [sub](const auto & w) {
        auto s = w.lock();
        return !s || s.get() == sub;
      }), list.end());
    if (list.empty()) {
      subscriptions_.erase(it);
      last = true;
    }
  }
  if (last && !stopping_) {
    send_registration(topic, Role::kSubscriber, false, false);
  }
}

void Node::release_publisher(const Publisher * pub)
{
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    auto it = publishers_.find(pub->topic());
    if (it == publishers_.end() || it->second.get() != pub) {
      return;
    }
    publishers_.erase(it);
  }
  if (!stopping_) {
    send_registration(pub->topic(), Role::kPublisher, false, false);
  }
}

registry::RegistryTable Node::snapshot_topics()
{
  auto reply = request(FrameKind::kCtrl,
      [](std::uint32_t id) {return proto::encode_ctrl(proto::SnapshotRequest{id});},
      std::nullopt, Role::kPublisher, true);
  if (!reply || !std::holds_alternative<proto::Snapshot>(*reply)) {
    throw Error(ErrorCode::kRegistryUnavailable, "snapshot unavailable");
  }
  return std::get<proto::Snapshot>(*reply).table;
}

void Node::dispatch(const MessageEnvelope & env)
{
  std::vector<std::shared_ptr<Subscription>> targets;
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    auto it = subscriptions_.find(env.topic);
    if (it == subscriptions_.end()) {
      return;
    }
    for (const auto & w : it->second) {
      if (auto s = w.lock()) {
        targets.push_back(std::move(s));
      }
    }
  }
  for (auto & s : targets) {
    s->deliver(env);
  }
}

void Node::accept_loop()
{
  while (!stopping_) {
    auto sock = listener_.accept(kPoll);
    if (!sock) {
      continue;
    }
    auto in = std::make_shared<Inbound>(std::move(*sock));
    std::lock_guard<std::mutex> lock(threads_mu_);
    if (stopping_) {
      break;
    }
    in->thread = std::thread([this, in] {serve_inbound(in);});
    inbound_.push_back(in);
  }
}

void Node::serve_inbound(std::shared_ptr<Inbound> in)
{
  try {
    auto first = in->conn.read(std::chrono::milliseconds(5000));
    if (!first || first->kind != FrameKind::kHello) {
      throw Error(ErrorCode::kIo, "expected HELLO");
    }
    auto hello = proto::decode_hello(ByteView(first->control().bytes));
    if (!hello || !std::holds_alternative<proto::PeerHello>(*hello)) {
      throw Error(ErrorCode::kIo, "bad peer HELLO");
    }
    const auto topic = std::get<proto::PeerHello>(*hello).topic;
    while (!stopping_) {
      auto frame = in->conn.read();
      if (frame && frame->kind == FrameKind::kData && frame->envelope().topic == topic) {
        dispatch(frame->envelope());
      }
    }
  } catch (const Error & e) {
    spdlog::debug("node {}: inbound connection ended: {}", options_.name, e.what());
  }
  in->done = true;
}

void Node::retire_link(std::shared_ptr<PeerLink> link)
{
  link->stop();
  std::lock_guard<std::mutex> lock(threads_mu_);
  retired_.push_back(std::move(link));
}

void Node::join_finished()
{
  std::vector<std::shared_ptr<Inbound>> done_in;
  std::vector<std::shared_ptr<PeerLink>> done_links;
  {
    std::lock_guard<std::mutex> lock(threads_mu_);
    for (auto it = inbound_.begin(); it != inbound_.end(); ) {
      if ((*it)->done) {
        done_in.push_back(*it);
        it = inbound_.erase(it);
      } else {
        ++it;
      }
    }
    for (auto it = retired_.begin(); it != retired_.end(); ) {
      if ((*it)->finished()) {
        done_links.push_back(*it);
        it = retired_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto & in : done_in) {
    if (in->thread.joinable()) {
      in->thread.join();
    }
  }
  for (auto & l : done_links) {
    l->join();
  }
}

void Node::drop_peer_connections()
{
  std::vector<std::shared_ptr<Publisher>> pubs;
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    for (auto & [t, p] : publishers_) {
      pubs.push_back(p);
    }
  }
  for (auto & p : pubs) {
    p->drop_connections();
  }
  std::lock_guard<std::mutex> lock(threads_mu_);
  for (auto & in : inbound_) {
    in->conn.shutdown();
  }
}

void Node::shutdown()
{
  if (stopping_.exchange(true)) {
    return;
  }
  stop_cv_.notify_all();

  // Best-effort unregistration so peers learn immediately rather than at expiry.
  std::vector<std::pair<TopicName, Role>> regs;
  std::vector<std::shared_ptr<Publisher>> pubs;
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    for (auto & [t, p] : publishers_) {
      regs.emplace_back(t, Role::kPublisher);
      pubs.push_back(p);
    }
    for (auto & [t, s] : subscriptions_) {
      regs.emplace_back(t, Role::kSubscriber);
    }
  }
  std::shared_ptr<net::FrameConnection> conn;
  {
    std::lock_guard<std::mutex> lock(reg_mu_);
    conn = reg_conn_;
  }
  if (conn) {
    for (auto & [topic, role] : regs) {
      try {
        auto body = proto::encode_registration(proto::Registration{0, role, topic.str()});
        conn->write_control(FrameKind::kUnsub, ByteView(body));
      } catch (const Error &) {
        break;
      }
    }
    conn->shutdown();
  }

  if (registry_thread_.joinable()) {
    registry_thread_.join();
  }
  if (accept_thread_.joinable()) {
    accept_thread_.join();
  }
  listener_.close();
  drop_registry("shutdown");

  for (auto & p : pubs) {
    p->stop_links();
  }
  std::vector<std::shared_ptr<Inbound>> inbound;
  std::vector<std::shared_ptr<PeerLink>> retired;
  {
    std::lock_guard<std::mutex> lock(threads_mu_);
    inbound.swap(inbound_);
    retired.swap(retired_);
  }
  for (auto & in : inbound) {
    in->conn.shutdown();
  }
  for (auto & in : inbound) {
    if (in->thread.joinable()) {
      in->thread.join();
    }
  }
  for (auto & l : retired) {
    l->stop();
    l->join();
  }
}

}  // namespace fog::node
