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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fog/common/error.hpp"
#include "fog/netmon/netmon.hpp"
#include "fog/registry/protocol.hpp"
#include "fog/registry/registry.hpp"
#include "support/wait.hpp"

namespace fog::netmon
{
namespace
{

using namespace std::chrono_literals;
using testing::wait_until;

TEST(Stats, RecordLayoutIsBigEndian)
{
  NetworkStats s{1.5, 491520.0, 2.0, 0x0102030405060708ull, false};
  auto rec = encode_stats(s);
  EXPECT_EQ(rec.size(), 32u);
  EXPECT_EQ(get_u64_be(rec.data()), 1500u);
  EXPECT_EQ(get_u64_be(rec.data() + 8), 491520u);
  EXPECT_EQ(get_u64_be(rec.data() + 16), 2u);
  EXPECT_EQ(rec[24], 0x01);
  EXPECT_EQ(rec[31], 0x08);
}

TEST(Stats, StaleFlagUsesTimestampLowBit)
{
  NetworkStats s{3.0, 0, 0, 1001, true};
  auto back = decode_stats(ByteView(encode_stats(s)));
  ASSERT_TRUE(back);
  EXPECT_TRUE(back->stale);
  EXPECT_EQ(back->timestamp_ns, 1000u);
  s.stale = false;
  back = decode_stats(ByteView(encode_stats(s)));
  EXPECT_FALSE(back->stale);
}

TEST(Stats, QuantizedValuesRoundTripExactly)
{
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ms(0, 1000), rate(0, 1e9);
  for (int i = 0; i < 1000; ++i) {
    NetworkStats s{ms(rng), rate(rng), rate(rng), rng(), rng() % 2 == 0};
    auto q = quantize(s);
    auto rec = encode_stats(q);
    EXPECT_EQ(*decode_stats(ByteView(rec)), q);
    EXPECT_NEAR(q.rtt_ms, s.rtt_ms, 0.0005 + 1e-9);
    EXPECT_EQ(q.stale, s.stale);
  }
  EXPECT_FALSE(decode_stats(ByteView(Bytes(31))));
}

TEST(Ewma, AlphaPointTwo)
{
  Ewma e(0.2);
  EXPECT_FALSE(e.value());
  EXPECT_DOUBLE_EQ(e.update(10.0), 10.0);
  EXPECT_DOUBLE_EQ(e.update(20.0), 12.0);
  EXPECT_DOUBLE_EQ(e.update(12.0), 12.0);
  for (int i = 0; i < 200; ++i) {
    e.update(5.0);
  }
  EXPECT_NEAR(*e.value(), 5.0, 1e-9);
}

TEST(Throughput, SlidingWindowWithInjectedClock)
{
  std::chrono::nanoseconds now{0};
  ThroughputMeter m(1s, [&] {return now;});
  EXPECT_EQ(m.rate(), 0.0);
  for (int i = 0; i < 10; ++i) {
    now = i * 100ms;
    m.record(49152);
  }
  now = 950ms;
  EXPECT_DOUBLE_EQ(m.rate(), 491520.0);
  now = 1050ms;
  EXPECT_DOUBLE_EQ(m.rate(), 9 * 49152.0);
  now = 5s;
  EXPECT_EQ(m.rate(), 0.0);
  EXPECT_EQ(m.total(), 491520u);
}

class FakeProber : public Prober
{
public:
  bool send_ping(const Bytes & body) override
  {
    ++pings;
    if (answer && monitor) {
      auto copy = body;
      std::thread([m = monitor, copy] {
          std::this_thread::sleep_for(2ms);
          m->on_pong(ByteView(copy));
        }).detach();
    }
    return true;
  }

  std::atomic<int> pings{0};
  std::atomic<bool> answer{true};
  Monitor * monitor{nullptr};
};

class MonitorTest : public ::testing::Test
{
protected:
  void SetUp() override
  {
    server_.start();
    node_ = make_node("monitor");
    monitor_ = std::make_unique<Monitor>(node_, prober_,
        [this] {return node_->snapshot_topics();}, MonitorOptions{200ms, 0.2});
    prober_.monitor = monitor_.get();
  }

  void TearDown() override
  {
    monitor_.reset();
    std::this_thread::sleep_for(20ms);
  }

  std::shared_ptr<node::Node> make_node(const std::string & name)
  {
    node::NodeOptions o;
    o.name = name;
    o.master = server_.address();
    return node::Node::create(o);
  }

  registry::RegistryServer server_;
  std::shared_ptr<node::Node> node_;
  FakeProber prober_;
  std::unique_ptr<Monitor> monitor_;
};

TEST_F(MonitorTest, NoSubscriberNoProbes)
{
  monitor_->start();
  std::this_thread::sleep_for(1500ms);
  EXPECT_EQ(prober_.pings, 0);
  EXPECT_EQ(monitor_->latency_samples(), 0u);
  EXPECT_EQ(monitor_->throughput_samples(), 0u);
}

TEST_F(MonitorTest, SubscriberGetsOneSamplePerInterval)
{
  auto viewer = make_node("viewer");
  auto sub = viewer->subscribe(TopicName(kLatencyTopic), 64);
  monitor_->start();
  auto t0 = std::chrono::steady_clock::now();
  auto first = sub->next(2s);
  ASSERT_TRUE(first);
  EXPECT_LE(std::chrono::steady_clock::now() - t0, 400ms + 50ms);
  std::this_thread::sleep_for(2000ms);
  // 200 ms interval over ~2.4 s since start.
  auto n = sub->stats().received;
  EXPECT_GE(n, 10u);
  EXPECT_LE(n, 13u);
  auto st = decode_stats(ByteView(first->payload));
  ASSERT_TRUE(st);
  EXPECT_GT(st->rtt_ms, 0.0);
  EXPECT_FALSE(st->stale);
  EXPECT_EQ(monitor_->throughput_samples(), 0u);
}

TEST_F(MonitorTest, UnansweredProbePublishesStaleSample)
{
  auto viewer = make_node("viewer");
  auto sub = viewer->subscribe(TopicName(kLatencyTopic), 64);
  monitor_->start();
  auto ok = sub->next(2s);
  ASSERT_TRUE(ok);
  auto good = decode_stats(ByteView(ok->payload));
  prober_.answer = false;
  std::optional<NetworkStats> stale;
  ASSERT_TRUE(wait_until([&] {
      while (auto env = sub->try_next()) {
        auto st = decode_stats(ByteView(env->payload));
        if (st && st->stale) {
          stale = st;
        }
      }
      return stale.has_value();
    }, 3s));
  EXPECT_GT(stale->rtt_ms, 0.0);
  EXPECT_NEAR(stale->rtt_ms, *monitor_->rtt_ms(), 0.001);
  (void)good;
}

TEST_F(MonitorTest, StopsProbingWhenSubscriberLeaves)
{
  auto viewer = make_node("viewer");
  auto sub = viewer->subscribe(TopicName(kLatencyTopic), 64);
  monitor_->start();
  ASSERT_TRUE(sub->next(2s));
  sub->close();
  std::this_thread::sleep_for(500ms);
  int before = prober_.pings;
  std::this_thread::sleep_for(1000ms);
  EXPECT_EQ(prober_.pings, before);
}

TEST(AgentProber, MeasuresRoundTripToAgent)
{
  net::Listener agent("127.0.0.1", 0);
  std::atomic<bool> stop{false};
  std::thread server([&] {
      auto sock = agent.accept(3s);
      if (!sock) {
        return;
      }
      net::FrameConnection conn(std::move(*sock));
      try {
        while (!stop) {
          auto f = conn.read(100ms);
          if (f && f->kind == wire::FrameKind::kPing) {
            conn.write_control(wire::FrameKind::kPong, ByteView(f->control().bytes));
          }
        }
      } catch (const Error &) {
      }
    });
  registry::RegistryServer reg;
  reg.start();
  node::NodeOptions o;
  o.master = reg.address();
  auto node = node::Node::create(o);
  AgentProber prober(agent.address());
  auto viewer_opts = o;
  viewer_opts.name = "viewer";
  auto viewer = node::Node::create(viewer_opts);
  auto sub = viewer->subscribe(TopicName(kLatencyTopic), 16);
  {
    Monitor m(node, prober, [&] {return node->snapshot_topics();}, MonitorOptions{200ms, 0.2});
    prober.attach(&m);
    m.start();
    auto env = sub->next(2s);
    ASSERT_TRUE(env);
    auto st = decode_stats(ByteView(env->payload));
    ASSERT_TRUE(st);
    EXPECT_GT(st->rtt_ms, 0.0);
    EXPECT_LT(st->rtt_ms, 100.0);
    m.stop();
    prober.attach(nullptr);
  }
  stop = true;
  server.join();
}

}  // namespace
}  // namespace fog::netmon
