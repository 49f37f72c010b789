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

#ifndef FOG__BENCH__WORKLOAD_HPP_
#define FOG__BENCH__WORKLOAD_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "fog/node/node.hpp"

namespace fog::bench
{

inline constexpr std::size_t kDefaultFrameBytes = 49152;
inline constexpr const char * kRequestTopic = "/sensor";
inline constexpr const char * kResultTopic = "/result";

struct WorkloadSpec
{
  std::size_t frame_bytes{kDefaultFrameBytes};
  double rate_hz{10.0};
  std::uint64_t iterations{1 << 20};
  int workers{1};
  double core_share{1.0};

  /// Applies FOG_WORKERS and FOG_CORE_SHARE when set.
  WorkloadSpec with_env() const;
};

/// What the compute node publishes for each request it served.
struct ResultRecord
{
  std::uint64_t request_seq{0};
  std::uint64_t request_stamp_ns{0};
  std::uint64_t compute_ns{0};
  std::uint64_t value{0};
  std::uint8_t request_hops{0};
  std::uint8_t workers{0};

  bool operator==(const ResultRecord &) const = default;
};

inline constexpr std::size_t kResultSize = 34;

Bytes encode_result(const ResultRecord & r);
std::optional<ResultRecord> decode_result(ByteView bytes);

/// Seed the kernel uses for a request.
std::uint64_t request_seed(std::uint64_t seq);

/// Serves requests one at a time (queue capacity 1, newest wins) and
/// publishes one result per request served.
class ComputeService
{
public:
  ComputeService(std::shared_ptr<node::Node> node, WorkloadSpec spec);
  ~ComputeService();

  void stop();
  std::uint64_t served() const {return served_;}

private:
  void run();

  std::shared_ptr<node::Node> node_;
  WorkloadSpec spec_;
  std::shared_ptr<node::Subscription> sub_;
  std::shared_ptr<node::Publisher> pub_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> served_{0};
  std::thread thread_;
};

/// Publishes frames of `spec.frame_bytes` at `spec.rate_hz` until stopped or
/// `count` frames (0 = unbounded) have gone out.
class Source
{
public:
  Source(std::shared_ptr<node::Node> node, WorkloadSpec spec, std::uint64_t count = 0);
  ~Source();

  void stop();
  std::uint64_t published() const {return published_;}
  bool finished() const {return finished_;}

private:
  std::shared_ptr<node::Node> node_;
  std::shared_ptr<node::Publisher> pub_;
  std::atomic<bool> stopping_{false};
  std::atomic<bool> finished_{false};
  std::atomic<std::uint64_t> published_{0};
  std::thread thread_;
};

struct SinkSample
{
  ResultRecord result;
  std::uint64_t received_ns{0};
  std::size_t result_hops{0};
};

/// Records every result with its receive time.
class Sink
{
public:
  explicit Sink(std::shared_ptr<node::Node> node);

  std::vector<SinkSample> samples() const;
  std::size_t count() const;
  /// Results received in [from, to) by receive time (wall clock ns).
  std::size_t count_between(std::uint64_t from_ns, std::uint64_t to_ns) const;

private:
  mutable std::mutex mu_;
  std::vector<SinkSample> samples_;
  std::shared_ptr<node::Node> node_;
  std::shared_ptr<node::Subscription> sub_;
};

}  // namespace fog::bench

#endif  // FOG__BENCH__WORKLOAD_HPP_
