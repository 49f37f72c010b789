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

#ifndef FOG__NETMON__NETMON_HPP_
#define FOG__NETMON__NETMON_HPP_

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "fog/common/bytes.hpp"
#include "fog/node/node.hpp"
#include "fog/wire/topic.hpp"

namespace fog::netmon
{

inline constexpr const char * kLatencyTopic = "/fogros/latency";
inline constexpr const char * kThroughputTopic = "/fogros/throughput";
inline constexpr std::size_t kStatsSize = 32;

struct NetworkStats
{
  double rtt_ms{0.0};
  double bytes_per_s_in{0.0};
  double bytes_per_s_out{0.0};
  std::uint64_t timestamp_ns{0};
  /// The latest probe went unanswered; rtt_ms is the previous estimate.
  bool stale{false};

  bool operator==(const NetworkStats &) const = default;
};

/// Fixed record: rtt in whole microseconds, in-rate and out-rate in whole
/// bytes per second, timestamp in ns with bit 0 carrying the stale flag.
/// All fields are 8-byte big-endian unsigned integers.
std::array<std::uint8_t, kStatsSize> encode_stats(const NetworkStats & s);
std::optional<NetworkStats> decode_stats(ByteView bytes);
/// `s` as it reads back after a round trip through the fixed record.
NetworkStats quantize(const NetworkStats & s);

class Ewma
{
public:
  explicit Ewma(double alpha = 0.2)
  : alpha_(alpha) {}

  double update(double sample);
  std::optional<double> value() const {return value_;}

private:
  double alpha_;
  std::optional<double> value_;
};

/// Bytes per second over a sliding window.
class ThroughputMeter
{
public:
  using Clock = std::function<std::chrono::nanoseconds()>;

  explicit ThroughputMeter(std::chrono::nanoseconds window = std::chrono::seconds(1),
    Clock clock = {});

  void record(std::uint64_t bytes);
  double rate();
  std::uint64_t total() const;

private:
  void expire(std::chrono::nanoseconds now);

  std::chrono::nanoseconds window_;
  Clock clock_;
  mutable std::mutex mu_;
  std::deque<std::pair<std::chrono::nanoseconds, std::uint64_t>> events_;
  std::uint64_t in_window_{0};
  std::uint64_t total_{0};
};

/// Anything able to carry a PING and report its PONG back through
/// `Monitor::on_pong`.
class Prober
{
public:
  virtual ~Prober() = default;
  /// Returns false when the link is down and nothing was sent.
  virtual bool send_ping(const Bytes & body) = 0;
};

struct MonitorOptions
{
  std::chrono::milliseconds interval{1000};
  double alpha{0.2};
};

/// Periodic publisher of the monitor topics. Each interval it checks the
/// registry for subscribers; with none it sends and publishes nothing.
class Monitor
{
public:
  using Snapshot = std::function<registry::RegistryTable()>;

  Monitor(std::shared_ptr<node::Node> node, Prober & prober, Snapshot snapshot,
    MonitorOptions options = {});
  ~Monitor();

  void start();
  void stop();

  void on_pong(ByteView body);
  void count_in(std::uint64_t bytes) {in_.record(bytes);}
  void count_out(std::uint64_t bytes) {out_.record(bytes);}

  std::uint64_t pings_sent() const {return pings_sent_;}
  std::uint64_t latency_samples() const {return latency_samples_;}
  std::uint64_t throughput_samples() const {return throughput_samples_;}
  std::optional<double> rtt_ms() const;

private:
  void run();
  void tick();
  bool has_subscriber(const registry::RegistryTable & table, const char * topic) const;
  std::optional<double> probe();

  std::shared_ptr<node::Node> node_;
  Prober & prober_;
  Snapshot snapshot_;
  MonitorOptions options_;
  ThroughputMeter in_;
  ThroughputMeter out_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  Ewma ewma_;
  std::uint64_t awaiting_{0};
  std::optional<std::chrono::nanoseconds> answered_rtt_;
  bool stopping_{false};
  std::thread thread_;

  std::shared_ptr<node::Publisher> latency_pub_;
  std::shared_ptr<node::Publisher> throughput_pub_;
  std::atomic<std::uint64_t> pings_sent_{0};
  std::atomic<std::uint64_t> latency_samples_{0};
  std::atomic<std::uint64_t> throughput_samples_{0};
};

/// PING/PONG over a plain frame connection to an instance agent.
class AgentProber : public Prober
{
public:
  explicit AgentProber(net::Address agent);
  ~AgentProber() override;

  void attach(Monitor * monitor) {monitor_ = monitor;}
  bool send_ping(const Bytes & body) override;

private:
  void reader(std::shared_ptr<net::FrameConnection> conn);

  net::Address agent_;
  Monitor * monitor_{nullptr};
  std::mutex mu_;
  std::shared_ptr<net::FrameConnection> conn_;
  std::thread reader_;
  std::atomic<bool> stopping_{false};
};

}  // namespace fog::netmon

#endif  // FOG__NETMON__NETMON_HPP_
