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

// fog-node: generic node process (talker, listener and the benchmark roles).

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdio>
#include <thread>

#include "fog/bench/workload.hpp"
#include "fog/common/error.hpp"
#include "fog/common/log.hpp"
#include "fog/common/signals.hpp"
#include "fog/common/time.hpp"
#include "fog/node/node.hpp"

namespace
{

using namespace std::chrono_literals;

void print_envelope(const fog::wire::MessageEnvelope & env)
{
  std::printf("seq=%llu size=%zu origin=%s hops=%zu\n",
    static_cast<unsigned long long>(env.seq), env.payload.size(),
    std::string(fog::wire::to_string(env.origin)).c_str(), env.trace.size());
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"fog node"};
  std::string role = "talker";
  std::string topic = "/chatter";
  double rate = 10.0;
  std::size_t size = 0;
  std::uint64_t count = 0;
  std::uint64_t iterations = 1 << 20;
  app.add_option("--role", role, "talker, listener, source, compute or sink")
  ->check(CLI::IsMember({"talker", "listener", "source", "compute", "sink"}));
  app.add_option("--topic", topic, "topic for talker and listener");
  app.add_option("--rate", rate, "publish rate in Hz");
  app.add_option("--size", size, "payload bytes (source default 49152)");
  app.add_option("--count", count, "messages to publish (0 = unbounded)");
  app.add_option("--iterations", iterations, "compute kernel iterations per request");
  CLI11_PARSE(app, argc, argv);

  fog::block_termination_signals();
  fog::init_logging(role.c_str());
  try {
    auto node = fog::node::Node::create(fog::node::NodeOptions::from_env(role));
    if (role == "talker") {
      auto pub = node->advertise(fog::TopicName(topic));
      std::atomic<bool> stop{false};
      std::thread t([&] {
          auto period = std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::duration<double>(1.0 / rate));
          auto next = std::chrono::steady_clock::now();
          for (std::uint64_t i = 1; !stop && (count == 0 || i <= count); ++i) {
            std::string text = "msg " + std::to_string(i);
            fog::Bytes payload(text.begin(), text.end());
            if (payload.size() < size) {
              payload.resize(size, '.');
            }
            pub->publish(std::move(payload));
            next += period;
            std::this_thread::sleep_until(next);
          }
        });
      fog::wait_termination_signal();
      stop = true;
      t.join();
    } else if (role == "listener") {
      auto sub = node->subscribe(fog::TopicName(topic), print_envelope);
      fog::wait_termination_signal();
      sub->close();
    } else {
      fog::bench::WorkloadSpec spec;
      spec.rate_hz = rate;
      spec.iterations = iterations;
      if (size > 0) {
        spec.frame_bytes = size;
      }
      spec = spec.with_env();
      if (role == "source") {
        fog::bench::Source source(node, spec, count);
        fog::wait_termination_signal();
      } else if (role == "compute") {
        fog::bench::ComputeService compute(node, spec);
        spdlog::info("compute: {} workers, core share {}", spec.workers, spec.core_share);
        fog::wait_termination_signal();
      } else {
        auto sub = node->subscribe(fog::TopicName(fog::bench::kResultTopic),
            [](const fog::wire::MessageEnvelope & env) {
              auto r = fog::bench::decode_result(fog::ByteView(env.payload));
              if (!r) {
                return;
              }
              double e2e = (fog::wall_ns() - r->request_stamp_ns) / 1e6;
              std::printf("result seq=%llu e2e_ms=%.3f compute_ms=%.3f value=%016llx\n",
                static_cast<unsigned long long>(r->request_seq), e2e, r->compute_ns / 1e6,
                static_cast<unsigned long long>(r->value));
              std::fflush(stdout);
            });
        fog::wait_termination_signal();
        sub->close();
      }
    }
    node->shutdown();
  } catch (const fog::Error & e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
