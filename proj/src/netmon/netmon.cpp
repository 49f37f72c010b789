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

#include "fog/netmon/netmon.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

#include "fog/common/error.hpp"
#include "fog/common/time.hpp"
#include "fog/registry/protocol.hpp"

namespace fog::netmon
{
namespace
{

std::uint64_t to_u64(double v)
{
  if (!(v > 0.0)) {
    return 0;
  }
  if (v >= 1.8e19) {
    return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(std::llround(v));
}

}  // namespace

std::array<std::uint8_t, kStatsSize> encode_stats(const NetworkStats & s)
{
  std::array<std::uint8_t, kStatsSize> out{};
  put_u64_be(out.data(), to_u64(s.rtt_ms * 1000.0));
  put_u64_be(out.data() + 8, to_u64(s.bytes_per_s_in));
  put_u64_be(out.data() + 16, to_u64(s.bytes_per_s_out));
  put_u64_be(out.data() + 24, (s.timestamp_ns & ~std::uint64_t{1}) | (s.stale ? 1 : 0));
  return out;
}

std::optional<NetworkStats> decode_stats(ByteView bytes)
{
  if (bytes.size() != kStatsSize) {
    return std::nullopt;
  }
  NetworkStats s;
  s.rtt_ms = static_cast<double>(get_u64_be(bytes.data())) / 1000.0;
  s.bytes_per_s_in = static_cast<double>(get_u64_be(bytes.data() + 8));
  s.bytes_per_s_out = static_cast<double>(get_u64_be(bytes.data() + 16));
  auto ts = get_u64_be(bytes.data() + 24);
  s.timestamp_ns = ts & ~std::uint64_t{1};
  s.stale = (ts & 1) != 0;
  return s;
}

NetworkStats quantize(const NetworkStats & s)
{
  auto rec = encode_stats(s);
  return *decode_stats(ByteView(rec));
}

double Ewma::update(double sample)
{
  value_ = value_ ? alpha_ * sample + (1.0 - alpha_) * *value_ : sample;
  return *value_;
}

ThroughputMeter::ThroughputMeter(std::chrono::nanoseconds window, Clock clock)
: window_(window), clock_(std::move(clock))
{
  if (!clock_) {
    clock_ = [] {return std::chrono::nanoseconds(mono_ns());};
  }
}

void ThroughputMeter::expire(std::chrono::nanoseconds now)
{
  while (!events_.empty() && events_.front().first <= now - window_) {
    in_window_ -= events_.front().second;
    events_.pop_front();
  }
}

void ThroughputMeter::record(std::uint64_t bytes)
{
  auto now = clock_();
  std::lock_guard<std::mutex> lock(mu_);
  expire(now);
  events_.emplace_back(now, bytes);
  in_window_ += bytes;
  total_ += bytes;
}

double ThroughputMeter::rate()
{
  auto now = clock_();
  std::lock_guard<std::mutex> lock(mu_);
  expire(now);
  return static_cast<double>(in_window_) / std::chrono::duration<double>(window_).count();
}

std::uint64_t ThroughputMeter::total() const
{
  std::lock_guard<std::mutex> lock(mu_);
  return total_;
}

Monitor::Monitor(std::shared_ptr<node::Node> node, Prober & prober, Snapshot snapshot,
  MonitorOptions options)
: node_(std::move(node)), prober_(prober), snapshot_(std::move(snapshot)),
  options_(options), ewma_(options.alpha)
{
}

Monitor::~Monitor()
{
  stop();
}

void Monitor::start()
{
  std::lock_guard<std::mutex> lock(mu_);
  if (thread_.joinable()) {
    return;
  }
  stopping_ = false;
  thread_ = std::thread([this] {run();});
}

void Monitor::stop()
{
  {
    std::lock_guard<std::mutex> lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) {
    thread_.join();
  }
}

std::optional<double> Monitor::rtt_ms() const
{
  std::lock_guard<std::mutex> lock(mu_);
  return ewma_.value();
}

void Monitor::on_pong(ByteView body)
{
  auto ping = proto::decode_ping(body);
  if (!ping) {
    return;
  }
  auto now = mono_ns();
  std::lock_guard<std::mutex> lock(mu_);
  if (ping->nonce != awaiting_ || answered_rtt_ || now < ping->sent_ns) {
    return;
  }
  answered_rtt_ = std::chrono::nanoseconds(now - ping->sent_ns);
  cv_.notify_all();
}

std::optional<double> Monitor::probe()
{
  proto::Ping ping;
  {
    std::lock_guard<std::mutex> lock(mu_);
    ping.nonce = ++awaiting_;
    answered_rtt_.reset();
  }
  ping.sent_ns = mono_ns();
  if (!prober_.send_ping(proto::encode_ping(ping))) {
    return std::nullopt;
  }
  ++pings_sent_;
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait_for(lock, options_.interval * 8 / 10, [&] {return answered_rtt_.has_value() || stopping_;});
  if (!answered_rtt_) {
    return std::nullopt;
  }
  return std::chrono::duration<double, std::milli>(*answered_rtt_).count();
}

bool Monitor::has_subscriber(const registry::RegistryTable & table, const char * topic) const
{
  auto it = table.topics.find(TopicName(topic));
  if (it == table.topics.end()) {
    return false;
  }
  for (const auto & [id, ep] : it->second.subscribers) {
    if (id != node_->id()) {
      return true;
    }
  }
  return false;
}

void Monitor::tick()
{
  registry::RegistryTable table;
  try {
    table = snapshot_();
  } catch (const Error & e) {
    spdlog::debug("monitor: snapshot failed: {}", e.what());
    return;
  }
  bool want_latency = has_subscriber(table, kLatencyTopic);
  bool want_throughput = has_subscriber(table, kThroughputTopic);
  if (!want_latency && !want_throughput) {
    return;
  }
  NetworkStats stats;
  if (want_latency) {
    auto sample = probe();
    std::lock_guard<std::mutex> lock(mu_);
    if (sample) {
      stats.rtt_ms = ewma_.update(*sample);
    } else {
      stats.rtt_ms = ewma_.value().value_or(0.0);
      stats.stale = true;
    }
  } else {
    std::lock_guard<std::mutex> lock(mu_);
    stats.rtt_ms = ewma_.value().value_or(0.0);
  }
  stats.bytes_per_s_in = in_.rate();
  stats.bytes_per_s_out = out_.rate();
  stats.timestamp_ns = wall_ns();
  auto rec = encode_stats(stats);
  try {
    if (want_latency) {
      if (!latency_pub_) {
        latency_pub_ = node_->advertise(TopicName(kLatencyTopic));
      }
      latency_pub_->publish(Bytes(rec.begin(), rec.end()));
      ++latency_samples_;
    }
    if (want_throughput) {
      if (!throughput_pub_) {
        throughput_pub_ = node_->advertise(TopicName(kThroughputTopic));
      }
      throughput_pub_->publish(Bytes(rec.begin(), rec.end()));
      ++throughput_samples_;
    }
  } catch (const Error & e) {
    spdlog::debug("monitor: publish failed: {}", e.what());
  }
}

void Monitor::run()
{
  auto next = std::chrono::steady_clock::now() + options_.interval;
  while (true) {
    {
      std::unique_lock<std::mutex> lock(mu_);
      if (cv_.wait_until(lock, next, [&] {return stopping_;})) {
        return;
      }
    }
    tick();
    next += options_.interval;
    auto now = std::chrono::steady_clock::now();
    if (next < now) {
      next = now + options_.interval;
    }
  }
}

AgentProber::AgentProber(net::Address agent)
: agent_(std::move(agent))
{
}

AgentProber::~AgentProber()
{
  stopping_ = true;
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (conn_) {
      conn_->shutdown();
    }
  }
  if (reader_.joinable()) {
    reader_.join();
  }
}

bool AgentProber::send_ping(const Bytes & body)
{
  std::unique_lock<std::mutex> lock(mu_);
  if (!conn_) {
    if (reader_.joinable()) {
      reader_.join();
    }
    try {
      conn_ = std::make_shared<net::FrameConnection>(
        net::connect_tcp(agent_, std::chrono::milliseconds(500)));
    } catch (const Error & e) {
      spdlog::debug("agent prober: {}", e.what());
      return false;
    }
    reader_ = std::thread([this, c = conn_] {reader(c);});
  }
  try {
    conn_->write_control(wire::FrameKind::kPing, ByteView(body));
  } catch (const Error &) {
    conn_->shutdown();
    return false;
  }
  return true;
}

void AgentProber::reader(std::shared_ptr<net::FrameConnection> conn)
{
  try {
    while (!stopping_) {
      auto f = conn->read(std::chrono::milliseconds(200));
      if (f && f->kind == wire::FrameKind::kPong && monitor_) {
        monitor_->on_pong(ByteView(f->control().bytes));
      }
    }
  } catch (const Error &) {
  }
  std::lock_guard<std::mutex> lock(mu_);
  if (conn_ == conn) {
    conn_.reset();
  }
}

}  // namespace fog::netmon
