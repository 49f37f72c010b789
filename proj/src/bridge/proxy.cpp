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

#include "fog/bridge/proxy.hpp"

#include <spdlog/spdlog.h>

#include <fstream>

#include "fog/common/kvfile.hpp"
#include "fog/registry/protocol.hpp"

namespace fog::bridge
{
namespace
{

using Clock = std::chrono::steady_clock;
using namespace std::chrono_literals;

struct Outgoing
{
  wire::FrameKind kind{wire::FrameKind::kCtrl};
  Bytes bytes;
  std::size_t payload{0};
};

void add_counts(KindCounts & into, const KindCounts & from)
{
  for (std::size_t i = 0; i < into.frames.size(); ++i) {
    into.frames[i] += from.frames[i];
  }
  into.data_payload_bytes += from.data_payload_bytes;
}

bool is_monitor_topic(const TopicName & t)
{
  return t.str().rfind(kMonitorPrefix, 0) == 0;
}

Bytes summary_ctrl(const Summary & s)
{
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(ChannelOp::kSummary));
  w.raw(ByteView(encode_summary(s)));
  return wire::encode_control(wire::FrameKind::kCtrl, ByteView(w.take()));
}

}  // namespace

struct ProxyEndpoint::Session
{
  explicit Session(std::unique_ptr<SecureChannel> c, std::size_t capacity)
  : ch(std::move(c)), queue(capacity) {}

  std::unique_ptr<SecureChannel> ch;
  net::BasicSendQueue<Outgoing> queue;
  std::thread reader;
  std::thread writer;
  std::atomic<bool> done{false};
  bool accounted{false};
};

class ProxyEndpoint::ChannelProber : public netmon::Prober
{
public:
  explicit ChannelProber(ProxyEndpoint & owner)
  : owner_(owner) {}

  bool send_ping(const Bytes & body) override
  {
    return owner_.send_frame(wire::FrameKind::kPing,
             wire::encode_control(wire::FrameKind::kPing, ByteView(body)), 0);
  }

private:
  ProxyEndpoint & owner_;
};

ProxyEndpoint::ProxyEndpoint(ProxyOptions options)
: options_(std::move(options))
{
  node::NodeOptions no;
  no.name = options_.name;
  no.master = options_.registry;
  no.origin = options_.side;
  no.backoff = options_.backoff;
  node_ = node::Node::create(no);
  if (options_.role == ChannelRole::kResponder) {
    listener_ = std::make_unique<net::Listener>(options_.listen_host, options_.listen_port);
  }
  prober_ = std::make_unique<ChannelProber>(*this);
  if (options_.monitor) {
    monitor_ = std::make_unique<netmon::Monitor>(node_, *prober_,
        [this] {
          std::lock_guard<std::mutex> lock(table_mu_);
          if (!snapshot_) {
            throw Error(ErrorCode::kRegistryUnavailable, "no registry snapshot yet");
          }
          return *snapshot_;
        }, options_.monitor_options);
  }
}

ProxyEndpoint::~ProxyEndpoint()
{
  stop();
}

net::Address ProxyEndpoint::channel_address() const
{
  if (!listener_) {
    throw Error(ErrorCode::kIo, "initiator endpoints do not listen");
  }
  return listener_->address();
}

std::string ProxyEndpoint::hop_label() const
{
  return "proxy:" + std::string(wire::to_string(options_.side));
}

void ProxyEndpoint::start()
{
  if (channel_thread_.joinable()) {
    return;
  }
  stopping_ = false;
  if (options_.role == ChannelRole::kInitiator) {
    channel_thread_ = std::thread([this] {connector_loop();});
  } else {
    channel_thread_ = std::thread([this] {acceptor_loop();});
  }
  discovery_thread_ = std::thread([this] {discovery_loop();});
  if (monitor_) {
    monitor_->start();
  }
}

void ProxyEndpoint::stop()
{
  if (monitor_) {
    monitor_->stop();
  }
  {
    std::lock_guard<std::mutex> lock(stop_mu_);
    stopping_ = true;
  }
  stop_cv_.notify_all();
  std::vector<std::shared_ptr<Session>> sessions;
  {
    std::lock_guard<std::mutex> lock(session_mu_);
    if (session_) {
      session_->ch->shutdown();
    }
  }
  if (channel_thread_.joinable()) {
    channel_thread_.join();
  }
  if (discovery_thread_.joinable()) {
    discovery_thread_.join();
  }
  {
    std::lock_guard<std::mutex> lock(session_mu_);
    if (session_) {
      sessions.push_back(session_);
    }
    sessions.insert(sessions.end(), ended_.begin(), ended_.end());
    ended_.clear();
  }
  for (auto & s : sessions) {
    s->ch->shutdown();
    s->queue.close();
    if (s->reader.joinable()) {
      s->reader.join();
    }
  }
  if (node_) {
    node_->shutdown();
  }
  if (listener_) {
    listener_->close();
  }
  write_status();
}

bool ProxyEndpoint::sleep_for(std::chrono::milliseconds d)
{
  std::unique_lock<std::mutex> lock(stop_mu_);
  return !stop_cv_.wait_for(lock, d, [this] {return stopping_.load();});
}

void ProxyEndpoint::connector_loop()
{
  Backoff backoff(options_.backoff);
  while (!stopping_) {
    std::shared_ptr<Session> session;
    try {
      auto sock = net::connect_tcp(options_.peer, 1000ms);
      auto ch = SecureChannel::handshake(std::move(sock), options_.secret,
          ChannelRole::kInitiator, options_.handshake_timeout);
      session = std::make_shared<Session>(std::move(ch), options_.queue_capacity);
    } catch (const Error & e) {
      if (e.code() == ErrorCode::kChannelAuthFailure) {
        ++auth_failures_;
      }
      spdlog::info("{}: channel to {} unavailable: {}", options_.name, options_.peer.str(), e.what());
      auto delay = backoff.next();
      if (!delay) {
        spdlog::error("{}: giving up on channel", options_.name);
        return;
      }
      sleep_for(*delay);
      continue;
    }
    backoff.reset();
    install_session(session);
    while (!session->done && sleep_for(50ms)) {
    }
    if (session->reader.joinable()) {
      session->reader.join();
    }
    std::lock_guard<std::mutex> lock(session_mu_);
    ended_.erase(std::remove(ended_.begin(), ended_.end(), session), ended_.end());
  }
}

void ProxyEndpoint::acceptor_loop()
{
  while (!stopping_) {
    std::optional<net::Socket> sock;
    try {
      sock = listener_->accept(200ms);
    } catch (const Error & e) {
      spdlog::warn("{}: accept failed: {}", options_.name, e.what());
      sleep_for(200ms);
      continue;
    }
    {
      // Reap sessions whose reader has finished.
      std::vector<std::shared_ptr<Session>> finished;
      {
        std::lock_guard<std::mutex> lock(session_mu_);
        auto it = std::partition(ended_.begin(), ended_.end(),
            [](const auto & s) {return !s->done;});
        finished.assign(it, ended_.end());
        ended_.erase(it, ended_.end());
      }
      for (auto & s : finished) {
        if (s->reader.joinable()) {
          s->reader.join();
        }
      }
    }
    if (!sock) {
      continue;
    }
    try {
      auto ch = SecureChannel::handshake(std::move(*sock), options_.secret,
          ChannelRole::kResponder, options_.handshake_timeout);
      install_session(std::make_shared<Session>(std::move(ch), options_.queue_capacity));
    } catch (const Error & e) {
      if (e.code() == ErrorCode::kChannelAuthFailure) {
        ++auth_failures_;
      }
      spdlog::warn("{}: rejected channel: {}", options_.name, e.what());
    }
  }
}

void ProxyEndpoint::install_session(std::shared_ptr<Session> s)
{
  {
    std::lock_guard<std::mutex> lock(session_mu_);
    if (session_) {
      session_->ch->shutdown();
      session_->queue.close();
      ended_.push_back(session_);
    }
    session_ = s;
    ended_.push_back(s);
  }
  ++sessions_;
  spdlog::info("{}: channel established (send key {})", options_.name, s->ch->send_key_id());
  s->writer = std::thread([this, s] {
        try {
          while (true) {
            auto item = s->queue.pop(200ms);
            if (!item) {
              if (s->queue.closed()) {
                return;
              }
              continue;
            }
            s->ch->send_encoded(item->kind, ByteView(item->bytes), item->payload);
            if (item->kind == wire::FrameKind::kData && monitor_) {
              monitor_->count_out(item->payload);
            }
          }
        } catch (const Error & e) {
          spdlog::info("{}: channel write failed: {}", options_.name, e.what());
          s->ch->shutdown();
        }
      });
  s->reader = std::thread([this, s] {run_session(s);});
  std::optional<Summary> local;
  {
    std::lock_guard<std::mutex> lock(table_mu_);
    local = local_;
  }
  if (local) {
    send_frame(wire::FrameKind::kCtrl, summary_ctrl(*local), 0);
  }
}

void ProxyEndpoint::run_session(std::shared_ptr<Session> s)
{
  auto last_rx = Clock::now();
  try {
    while (!stopping_) {
      auto frame = s->ch->receive(200ms);
      if (!frame) {
        if (Clock::now() - last_rx > options_.channel_timeout) {
          throw Error(ErrorCode::kChannelDown, "no traffic from peer");
        }
        continue;
      }
      last_rx = Clock::now();
      on_remote(*frame, *s);
    }
  } catch (const Error & e) {
    if (e.code() == ErrorCode::kChannelAuthFailure || e.code() == ErrorCode::kReplayDetected) {
      ++auth_failures_;
    }
    spdlog::info("{}: channel session ended: {}", options_.name, e.what());
  }
  s->ch->shutdown();
  s->queue.close();
  s->queue.clear();
  if (s->writer.joinable()) {
    s->writer.join();
  }
  std::lock_guard<std::mutex> lock(session_mu_);
  add_counts(sent_total_, s->ch->sent());
  add_counts(received_total_, s->ch->received());
  s->accounted = true;
  if (session_ == s) {
    session_.reset();
  }
  s->done = true;
}

bool ProxyEndpoint::send_frame(wire::FrameKind kind, Bytes encoded, std::size_t payload)
{
  std::shared_ptr<Session> s;
  {
    std::lock_guard<std::mutex> lock(session_mu_);
    s = session_;
  }
  if (!s || s->done || s->ch->is_down()) {
    return false;
  }
  s->queue.push(Outgoing{kind, std::move(encoded), payload});
  return true;
}

void ProxyEndpoint::on_remote(const wire::Frame & frame, Session & s)
{
  switch (frame.kind) {
    case wire::FrameKind::kCtrl: {
        const auto & body = frame.control().bytes;
        if (!body.empty() && body[0] == static_cast<std::uint8_t>(ChannelOp::kSummary)) {
          auto summary = decode_summary(ByteView(body).subspan(1));
          if (!summary) {
            throw Error(ErrorCode::kChannelDown, "malformed summary");
          }
          {
            std::lock_guard<std::mutex> lock(table_mu_);
            remote_ = std::move(*summary);
          }
          stop_cv_.notify_all();
        }
        break;
      }
    case wire::FrameKind::kData: {
        auto env = frame.envelope();
        if (env.origin == options_.side || is_monitor_topic(env.topic)) {
          ++suppressed_;
          break;
        }
        if (options_.policy.mode == TopicPolicy::Mode::kExplicit &&
          std::find(options_.policy.topics.begin(), options_.policy.topics.end(), env.topic) ==
          options_.policy.topics.end())
        {
          ++suppressed_;
          break;
        }
        if (monitor_) {
          monitor_->count_in(env.payload.size());
        }
        auto pub = inbound_publisher(env.topic);
        if (!pub) {
          ++dropped_;
          break;
        }
        if (!env.trace.empty() && env.trace.size() < wire::kMaxTraceHops) {
          env.trace.push_back(hop_label());
        }
        try {
          pub->forward(env);
          ++republished_;
        } catch (const Error & e) {
          ++dropped_;
          spdlog::debug("{}: republish failed: {}", options_.name, e.what());
        }
        break;
      }
    case wire::FrameKind::kPing:
      s.queue.push(Outgoing{wire::FrameKind::kPong,
          wire::encode_control(wire::FrameKind::kPong, ByteView(frame.control().bytes)), 0});
      break;
    case wire::FrameKind::kPong:
      if (monitor_) {
        monitor_->on_pong(ByteView(frame.control().bytes));
      }
      break;
    default:
      break;
  }
}

std::shared_ptr<node::Publisher> ProxyEndpoint::inbound_publisher(const TopicName & topic)
{
  {
    std::lock_guard<std::mutex> lock(table_mu_);
    auto it = inbound_.find(topic);
    if (it != inbound_.end()) {
      return it->second;
    }
  }
  std::shared_ptr<node::Publisher> pub;
  try {
    pub = node_->advertise(topic);
  } catch (const Error & e) {
    spdlog::warn("{}: cannot advertise {}: {}", options_.name, topic.str(), e.what());
    return nullptr;
  }
  std::lock_guard<std::mutex> lock(table_mu_);
  inbound_[topic] = pub;
  table_.insert({topic, outbound_from(wire::opposite(options_.side))});
  return pub;
}

void ProxyEndpoint::on_local(const wire::MessageEnvelope & env)
{
  {
    std::lock_guard<std::mutex> lock(table_mu_);
    if (!outbound_.count(env.topic)) {
      return;
    }
  }
  // Envelopes that already crossed once are never sent back.
  if (env.origin != options_.side) {
    ++suppressed_;
    return;
  }
  for (const auto & hop : env.trace) {
    if (hop.rfind("proxy:", 0) == 0) {
      ++suppressed_;
      return;
    }
  }
  Bytes encoded;
  if (!env.trace.empty() && env.trace.size() < wire::kMaxTraceHops) {
    auto copy = env;
    copy.trace.push_back(hop_label());
    encoded = wire::encode_data(copy);
  } else {
    encoded = wire::encode_data(env);
  }
  if (send_frame(wire::FrameKind::kData, std::move(encoded), env.payload.size())) {
    ++forwarded_;
  } else {
    ++dropped_;
  }
}

void ProxyEndpoint::discovery_loop()
{
  while (!stopping_) {
    poll_once();
    std::unique_lock<std::mutex> lock(stop_mu_);
    stop_cv_.wait_for(lock, options_.policy.poll_interval, [this] {return stopping_.load();});
  }
}

void ProxyEndpoint::poll_once()
{
  try {
    auto snap = node_->snapshot_topics();
    auto summary = summarize(snap, node_->id());
    {
      std::lock_guard<std::mutex> lock(table_mu_);
      snapshot_ = snap;
      local_ = summary;
    }
    send_frame(wire::FrameKind::kCtrl, summary_ctrl(summary), 0);
  } catch (const Error & e) {
    spdlog::debug("{}: registry snapshot failed: {}", options_.name, e.what());
  }
  reconcile();
  write_status();
}

void ProxyEndpoint::reconcile()
{
  BridgeTable desired;
  std::vector<TopicName> add_out, add_in, drop_out, drop_in;
  auto my_out = outbound_from(options_.side);
  {
    std::lock_guard<std::mutex> lock(table_mu_);
    if (!local_ || !remote_) {
      return;
    }
    const auto & edge = options_.side == wire::Origin::kEdge ? *local_ : *remote_;
    const auto & cloud = options_.side == wire::Origin::kEdge ? *remote_ : *local_;
    desired = apply_policy(discover_bridgeable(edge, cloud), options_.policy);
    for (const auto & e : desired) {
      if (e.direction == my_out) {
        if (!outbound_.count(e.topic)) {
          add_out.push_back(e.topic);
        }
      } else if (!inbound_.count(e.topic)) {
        add_in.push_back(e.topic);
      }
    }
    for (const auto & [t, sub] : outbound_) {
      if (!desired.count({t, my_out})) {
        drop_out.push_back(t);
      }
    }
    for (const auto & [t, pub] : inbound_) {
      if (!desired.count({t, outbound_from(wire::opposite(options_.side))})) {
        drop_in.push_back(t);
      }
    }
  }
  for (const auto & t : drop_out) {
    std::shared_ptr<node::Subscription> sub;
    {
      std::lock_guard<std::mutex> lock(table_mu_);
      auto it = outbound_.find(t);
      if (it != outbound_.end()) {
        sub = it->second;
        outbound_.erase(it);
      }
    }
    if (sub) {
      sub->close();
    }
  }
  for (const auto & t : drop_in) {
    std::shared_ptr<node::Publisher> pub;
    {
      std::lock_guard<std::mutex> lock(table_mu_);
      auto it = inbound_.find(t);
      if (it != inbound_.end()) {
        pub = it->second;
        inbound_.erase(it);
      }
    }
    if (pub) {
      pub->close();
    }
  }
  for (const auto & t : add_in) {
    inbound_publisher(t);
  }
  for (const auto & t : add_out) {
    try {
      // Registered first so that on_local accepts envelopes from the start.
      {
        std::lock_guard<std::mutex> lock(table_mu_);
        outbound_[t] = nullptr;
      }
      auto sub = node_->subscribe(t, [this](const wire::MessageEnvelope & env) {on_local(env);});
      std::lock_guard<std::mutex> lock(table_mu_);
      outbound_[t] = sub;
    } catch (const Error & e) {
      std::lock_guard<std::mutex> lock(table_mu_);
      outbound_.erase(t);
      spdlog::warn("{}: cannot subscribe {}: {}", options_.name, t.str(), e.what());
    }
  }
  std::lock_guard<std::mutex> lock(table_mu_);
  BridgeTable live;
  for (const auto & [t, sub] : outbound_) {
    live.insert({t, my_out});
  }
  for (const auto & [t, pub] : inbound_) {
    live.insert({t, outbound_from(wire::opposite(options_.side))});
  }
  table_ = std::move(live);
}

BridgeTable ProxyEndpoint::bridge_table() const
{
  std::lock_guard<std::mutex> lock(table_mu_);
  return table_;
}

bool ProxyEndpoint::channel_up() const
{
  std::lock_guard<std::mutex> lock(session_mu_);
  return session_ && !session_->done && !session_->ch->is_down();
}

std::optional<Summary> ProxyEndpoint::local_summary() const
{
  std::lock_guard<std::mutex> lock(table_mu_);
  return local_;
}

std::optional<Summary> ProxyEndpoint::remote_summary() const
{
  std::lock_guard<std::mutex> lock(table_mu_);
  return remote_;
}

ProxyStats ProxyEndpoint::stats() const
{
  ProxyStats out;
  out.forwarded = forwarded_;
  out.republished = republished_;
  out.suppressed = suppressed_;
  out.dropped = dropped_;
  out.sessions = sessions_;
  out.auth_failures = auth_failures_;
  std::lock_guard<std::mutex> lock(session_mu_);
  out.sent = sent_total_;
  out.received = received_total_;
  std::vector<std::shared_ptr<Session>> live(ended_.begin(), ended_.end());
  if (session_) {
    live.push_back(session_);
  }
  std::sort(live.begin(), live.end());
  live.erase(std::unique(live.begin(), live.end()), live.end());
  for (const auto & s : live) {
    if (!s->accounted) {
      add_counts(out.sent, s->ch->sent());
      add_counts(out.received, s->ch->received());
    }
  }
  return out;
}

void ProxyEndpoint::write_status()
{
  if (!options_.status_file) {
    return;
  }
  auto st = stats();
  KvSection s{"proxy", std::string(wire::to_string(options_.side)), 0, {}};
  std::vector<std::string> entries;
  for (const auto & e : bridge_table()) {
    entries.push_back(e.topic.str() + " " + std::string(to_string(e.direction)));
  }
  auto add = [&](const char * k, std::string v) {s.entries.push_back({k, std::move(v), 0});};
  add("channel", channel_up() ? "up" : "down");
  add("entries", join_list(entries));
  add("forwarded", std::to_string(st.forwarded));
  add("republished", std::to_string(st.republished));
  add("suppressed", std::to_string(st.suppressed));
  add("dropped", std::to_string(st.dropped));
  add("sessions", std::to_string(st.sessions));
  add("data_sent", std::to_string(st.sent.of(wire::FrameKind::kData)));
  add("data_received", std::to_string(st.received.of(wire::FrameKind::kData)));
  add("ping_sent", std::to_string(st.sent.of(wire::FrameKind::kPing)));
  if (monitor_ && monitor_->rtt_ms()) {
    add("rtt_ms", std::to_string(*monitor_->rtt_ms()));
  }
  auto tmp = *options_.status_file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << render_section(s);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, *options_.status_file, ec);
}

}  // namespace fog::bridge
