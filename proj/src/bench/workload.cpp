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

#include "fog/bench/workload.hpp"

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string>

#include "fog/bench/kernel.hpp"
#include "fog/common/error.hpp"
#include "fog/common/time.hpp"

namespace fog::bench
{

using namespace std::chrono_literals;

WorkloadSpec WorkloadSpec::with_env() const
{
  WorkloadSpec s = *this;
  if (const char * w = std::getenv("FOG_WORKERS")) {
    s.workers = std::max(1, std::atoi(w));
  }
  if (const char * c = std::getenv("FOG_CORE_SHARE")) {
    double v = std::strtod(c, nullptr);
    if (v > 0.0 && v <= 1.0) {
      s.core_share = v;
    }
  }
  return s;
}

Bytes encode_result(const ResultRecord & r)
{
  ByteWriter w;
  w.u64(r.request_seq);
  w.u64(r.request_stamp_ns);
  w.u64(r.compute_ns);
  w.u64(r.value);
  w.u8(r.request_hops);
  w.u8(r.workers);
  return w.take();
}

std::optional<ResultRecord> decode_result(ByteView bytes)
{
  if (bytes.size() != kResultSize) {
    return std::nullopt;
  }
  ByteReader rd(bytes);
  ResultRecord r;
  rd.u64(r.request_seq);
  rd.u64(r.request_stamp_ns);
  rd.u64(r.compute_ns);
  rd.u64(r.value);
  rd.u8(r.request_hops);
  rd.u8(r.workers);
  return r;
}

std::uint64_t request_seed(std::uint64_t seq)
{
  return seq * 0x2545f4914f6cdd1dull;
}

ComputeService::ComputeService(std::shared_ptr<node::Node> node, WorkloadSpec spec)
: node_(std::move(node)), spec_(spec)
{
  pub_ = node_->advertise(TopicName(kResultTopic));
  sub_ = node_->subscribe(TopicName(kRequestTopic), 1);
  thread_ = std::thread([this] {run();});
}

ComputeService::~ComputeService()
{
  stop();
}

void ComputeService::stop()
{
  stopping_ = true;
  if (thread_.joinable()) {
    thread_.join();
  }
}

void ComputeService::run()
{
  while (!stopping_) {
    auto req = sub_->next(100ms);
    if (!req) {
      continue;
    }
    auto run = run_kernel(request_seed(req->seq), spec_.iterations, spec_.workers, spec_.core_share);
    ResultRecord r;
    r.request_seq = req->seq;
    r.request_stamp_ns = req->timestamp_ns;
    r.compute_ns = static_cast<std::uint64_t>(run.elapsed.count());
    r.value = run.value;
    r.request_hops = static_cast<std::uint8_t>(req->trace.size());
    r.workers = static_cast<std::uint8_t>(std::min(spec_.workers, 255));
    try {
      pub_->publish(encode_result(r));
      ++served_;
    } catch (const Error & e) {
      spdlog::warn("compute: publish failed: {}", e.what());
      return;
    }
  }
}

Source::Source(std::shared_ptr<node::Node> node, WorkloadSpec spec, std::uint64_t count)
: node_(std::move(node))
{
  pub_ = node_->advertise(TopicName(kRequestTopic));
  thread_ = std::thread([this, spec, count] {
        auto period = std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::duration<double>(1.0 / std::max(spec.rate_hz, 1e-3)));
        auto next = std::chrono::steady_clock::now();
        Bytes frame(spec.frame_bytes);
        for (std::size_t i = 0; i < frame.size(); ++i) {
          frame[i] = static_cast<std::uint8_t>(i * 31 + 7);
        }
        while (!stopping_ && (count == 0 || published_ < count)) {
          try {
            pub_->publish(frame);
          } catch (const Error & e) {
            spdlog::warn("source: publish failed: {}", e.what());
            break;
          }
          ++published_;
          next += period;
          std::this_thread::sleep_until(next);
        }
        finished_ = true;
      });
}

Source::~Source()
{
  stop();
}

void Source::stop()
{
  stopping_ = true;
  if (thread_.joinable()) {
    thread_.join();
  }
}

Sink::Sink(std::shared_ptr<node::Node> node)
: node_(std::move(node))
{
  sub_ = node_->subscribe(TopicName(kResultTopic), [this](const wire::MessageEnvelope & env) {
        auto r = decode_result(ByteView(env.payload));
        if (!r) {
          return;
        }
        std::lock_guard<std::mutex> lock(mu_);
        samples_.push_back(SinkSample{*r, wall_ns(), env.trace.size()});
      });
}

std::vector<SinkSample> Sink::samples() const
{
  std::lock_guard<std::mutex> lock(mu_);
  return samples_;
}

std::size_t Sink::count() const
{
  std::lock_guard<std::mutex> lock(mu_);
  return samples_.size();
}

std::size_t Sink::count_between(std::uint64_t from_ns, std::uint64_t to_ns) const
{
  std::lock_guard<std::mutex> lock(mu_);
  std::size_t n = 0;
  for (const auto & s : samples_) {
    n += s.received_ns >= from_ns && s.received_ns < to_ns;
  }
  return n;
}

}  // namespace fog::bench
