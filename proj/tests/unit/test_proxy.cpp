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

#include <map>
#include <random>

#include "fog/netmon/netmon.hpp"
#include "support/generators.hpp"
#include "support/proxy_pair.hpp"
#include "support/wait.hpp"

namespace fog::bridge
{
namespace
{

using namespace std::chrono_literals;
using testing::ProxyPair;
using testing::wait_until;
using wire::FrameKind;
using wire::Origin;

using Clock = std::chrono::steady_clock;

Bytes text(const std::string & s) {return Bytes(s.begin(), s.end());}

bool has_entry(const ProxyEndpoint & p, const std::string & topic, Direction d)
{
  return p.bridge_table().count({TopicName(topic), d}) > 0;
}

TEST(Proxy, ChannelComesUp)
{
  ProxyPair pair;
  ASSERT_TRUE(wait_until([&] {return pair.edge->channel_up() && pair.cloud->channel_up();}, 5s));
  EXPECT_TRUE(pair.edge->bridge_table().empty());
}

TEST(Proxy, LatePublisherIsBridgedWithinTwoPolls)
{
  ProxyPair pair;
  auto listener = pair.node(Origin::kCloud, "listener");
  auto sub = listener->subscribe(TopicName("/sensor"), 16);
  std::this_thread::sleep_for(3s);
  ASSERT_TRUE(pair.edge->bridge_table().empty());

  auto talker = pair.node(Origin::kEdge, "talker");
  auto pub = talker->advertise(TopicName("/sensor"));
  auto t0 = Clock::now();
  ASSERT_TRUE(wait_until([&] {
      return has_entry(*pair.edge, "/sensor", Direction::kEdgeToCloud) &&
      pub->connected_count() == 1;
    }, 5s, 10ms));
  EXPECT_LE(Clock::now() - t0, 1000ms);
  ASSERT_TRUE(wait_until([&] {return has_entry(*pair.cloud, "/sensor", Direction::kEdgeToCloud);}, 2s));

  Bytes frame(49152);
  std::mt19937_64 rng(1);
  for (auto & b : frame) {
    b = static_cast<std::uint8_t>(rng());
  }
  pub->publish(frame);
  auto env = sub->next(3s);
  ASSERT_TRUE(env);
  EXPECT_EQ(env->payload, frame);
  EXPECT_EQ(env->publisher_id, talker->id());
  EXPECT_EQ(env->seq, 1u);
  EXPECT_EQ(env->origin, Origin::kEdge);
}

TEST(Proxy, EntryRemovedWhenSubscriberLeaves)
{
  ProxyPair pair;
  auto talker = pair.node(Origin::kEdge, "talker");
  auto pub = talker->advertise(TopicName("/cam"));
  auto listener = pair.node(Origin::kCloud, "listener");
  auto sub = listener->subscribe(TopicName("/cam"), 64);
  ASSERT_TRUE(wait_until([&] {return pub->connected_count() == 1;}, 5s));
  pub->publish(text("a"));
  ASSERT_TRUE(sub->next(3s));

  sub->close();
  auto t0 = Clock::now();
  ASSERT_TRUE(wait_until([&] {return pair.edge->bridge_table().empty();}, 5s, 10ms));
  EXPECT_LE(Clock::now() - t0, 1000ms);
  ASSERT_TRUE(wait_until([&] {return pub->link_count() == 0;}, 3s));
  auto before = pair.edge->stats().sent.of(FrameKind::kData);
  for (int i = 0; i < 20; ++i) {
    pub->publish(text("unwanted"));
  }
  std::this_thread::sleep_for(300ms);
  EXPECT_EQ(pair.edge->stats().sent.of(FrameKind::kData), before);
}

TEST(Proxy, ExplicitPolicyBridgesOnlyListedTopics)
{
  ProxyPair pair(TopicPolicy::explicit_list({TopicName("/a")}));
  auto talker = pair.node(Origin::kEdge, "talker");
  auto pa = talker->advertise(TopicName("/a"));
  auto pb = talker->advertise(TopicName("/b"));
  auto listener = pair.node(Origin::kCloud, "listener");
  auto sa = listener->subscribe(TopicName("/a"), 16);
  auto sb = listener->subscribe(TopicName("/b"), 16);
  ASSERT_TRUE(wait_until([&] {return pa->connected_count() == 1;}, 5s));
  std::this_thread::sleep_for(1200ms);
  EXPECT_EQ(pair.edge->bridge_table(), (BridgeTable{{TopicName("/a"), Direction::kEdgeToCloud}}));
  pa->publish(text("a"));
  pb->publish(text("b"));
  EXPECT_TRUE(sa->next(3s));
  EXPECT_FALSE(sb->next(500ms));
}

TEST(Proxy, BothSidesBothRolesCrossExactlyOnce)
{
  ProxyPair pair;
  auto edge_node = pair.node(Origin::kEdge, "edge_node", true);
  auto cloud_node = pair.node(Origin::kCloud, "cloud_node", true);
  auto edge_pub = edge_node->advertise(TopicName("/y"));
  auto cloud_pub = cloud_node->advertise(TopicName("/y"));
  auto edge_sub = edge_node->subscribe(TopicName("/y"), 256);
  auto cloud_sub = cloud_node->subscribe(TopicName("/y"), 256);
  ASSERT_TRUE(wait_until([&] {
      return pair.edge->bridge_table().size() == 2 && pair.cloud->bridge_table().size() == 2 &&
      edge_pub->connected_count() == 2 && cloud_pub->connected_count() == 2;
    }, 5s));
  constexpr int kEach = 50;
  for (int i = 0; i < kEach; ++i) {
    edge_pub->publish(text("e"));
    cloud_pub->publish(text("c"));
  }
  auto drain = [](auto & sub, std::map<NodeId, std::vector<std::uint64_t>> & seen) {
      while (auto env = sub->next(1500ms)) {
        seen[env->publisher_id].push_back(env->seq);
      }
    };
  std::map<NodeId, std::vector<std::uint64_t>> at_edge, at_cloud;
  drain(edge_sub, at_edge);
  drain(cloud_sub, at_cloud);
  std::vector<std::uint64_t> all(kEach);
  std::iota(all.begin(), all.end(), 1);
  for (auto * seen : {&at_edge, &at_cloud}) {
    EXPECT_EQ((*seen)[edge_node->id()], all);
    EXPECT_EQ((*seen)[cloud_node->id()], all);
  }
  EXPECT_EQ(pair.edge->stats().sent.of(FrameKind::kData), static_cast<std::uint64_t>(kEach));
  EXPECT_EQ(pair.cloud->stats().sent.of(FrameKind::kData), static_cast<std::uint64_t>(kEach));
  EXPECT_GT(pair.edge->stats().suppressed + pair.cloud->stats().suppressed, 0u);
}

TEST(Proxy, TraceGainsOneHopPerProxy)
{
  ProxyPair pair;
  auto talker = pair.node(Origin::kEdge, "talker", true);
  auto pub = talker->advertise(TopicName("/t"));
  auto listener = pair.node(Origin::kCloud, "listener");
  auto sub = listener->subscribe(TopicName("/t"), 16);
  ASSERT_TRUE(wait_until([&] {return pub->connected_count() == 1;}, 5s));
  pub->publish({});
  auto env = sub->next(3s);
  ASSERT_TRUE(env);
  EXPECT_EQ(env->trace, (std::vector<std::string>{"talker", "proxy:edge", "proxy:cloud"}));
  EXPECT_TRUE(env->payload.empty());
}

TEST(Proxy, IdleChannelCarriesNoDataOrPing)
{
  ProxyPair pair;
  auto talker = pair.node(Origin::kEdge, "talker");
  auto pub = talker->advertise(TopicName("/lonely"));
  ASSERT_TRUE(wait_until([&] {return pair.edge->channel_up();}, 5s));
  for (int i = 0; i < 30; ++i) {
    pub->publish(text("nobody listens"));
    std::this_thread::sleep_for(100ms);
  }
  for (auto * p : {pair.edge.get(), pair.cloud.get()}) {
    auto st = p->stats();
    EXPECT_EQ(st.sent.of(FrameKind::kData), 0u);
    EXPECT_EQ(st.sent.of(FrameKind::kPing), 0u);
    EXPECT_EQ(st.received.of(FrameKind::kPing), 0u);
    EXPECT_GT(st.sent.of(FrameKind::kCtrl), 0u);
  }
}

TEST(Proxy, MismatchedSecretsNeverCarryData)
{
  auto a = generate_secret();
  auto b = generate_secret();
  ProxyPair pair(TopicPolicy::automatic(), a, b);
  auto talker = pair.node(Origin::kEdge, "talker");
  auto pub = talker->advertise(TopicName("/s"));
  auto listener = pair.node(Origin::kCloud, "listener");
  auto sub = listener->subscribe(TopicName("/s"), 16);
  ASSERT_TRUE(wait_until([&] {return pair.edge->stats().auth_failures > 0;}, 5s));
  pub->publish({});
  EXPECT_FALSE(sub->next(500ms));
  EXPECT_FALSE(pair.edge->channel_up());
  EXPECT_EQ(pair.edge->stats().sessions, 0u);
}

TEST(Proxy, ResumesAfterChannelOutage)
{
  ProxyPair pair;
  auto talker = pair.node(Origin::kEdge, "talker");
  auto pub = talker->advertise(TopicName("/stream"));
  auto listener = pair.node(Origin::kCloud, "listener");
  auto sub = listener->subscribe(TopicName("/stream"), 1024);
  ASSERT_TRUE(wait_until([&] {return pub->connected_count() == 1;}, 5s));
  std::atomic<bool> run{true};
  std::thread producer([&] {
      while (run) {
        pub->publish(text("tick"));
        std::this_thread::sleep_for(20ms);
      }
    });
  std::uint64_t last = 0;
  auto consume_until = [&](Clock::time_point until) {
      std::size_t got = 0;
      while (Clock::now() < until) {
        if (auto env = sub->next(50ms)) {
          EXPECT_GT(env->seq, last);
          last = env->seq;
          ++got;
        }
      }
      return got;
    };
  EXPECT_GT(consume_until(Clock::now() + 1s), 0u);
  pair.relay->sever(2s);
  auto severed = Clock::now();
  consume_until(severed + 2s);
  auto before = last;
  bool resumed = false;
  while (Clock::now() < severed + 12s) {
    if (auto env = sub->next(50ms)) {
      EXPECT_GT(env->seq, last);
      last = env->seq;
      if (last > before + 5) {
        resumed = true;
        break;
      }
    }
  }
  run = false;
  producer.join();
  EXPECT_TRUE(resumed);
  EXPECT_LE(Clock::now() - severed, 12s);
  EXPECT_GE(pair.edge->stats().sessions, 2u);
  EXPECT_FALSE(pair.edge->bridge_table().empty());
}

TEST(Proxy, LatencyMonitorActivatesOnSubscription)
{
  ProxyPair pair;
  auto watcher = pair.node(Origin::kEdge, "watcher");
  ASSERT_TRUE(wait_until([&] {return pair.edge->channel_up();}, 5s));
  std::this_thread::sleep_for(1500ms);
  EXPECT_EQ(pair.edge->stats().sent.of(FrameKind::kPing), 0u);

  auto sub = watcher->subscribe(TopicName(netmon::kLatencyTopic), 64);
  auto t0 = Clock::now();
  auto first = sub->next(5s);
  ASSERT_TRUE(first);
  EXPECT_LE(Clock::now() - t0, 2000ms + 500ms);
  auto stats = netmon::decode_stats(ByteView(first->payload));
  ASSERT_TRUE(stats);
  EXPECT_GT(stats->rtt_ms, 0.0);
  EXPECT_LT(stats->rtt_ms, 100.0);
  EXPECT_FALSE(stats->stale);
  EXPECT_GT(pair.edge->stats().sent.of(FrameKind::kPing), 0u);
  EXPECT_EQ(pair.cloud->stats().sent.of(FrameKind::kPing), 0u);
}

TEST(Proxy, ThroughputReflectsStreamRate)
{
  ProxyPair pair;
  auto talker = pair.node(Origin::kEdge, "talker");
  auto pub = talker->advertise(TopicName("/frames"));
  auto listener = pair.node(Origin::kCloud, "listener");
  auto sub = listener->subscribe(TopicName("/frames"), 64);
  auto tp = listener->subscribe(TopicName(netmon::kThroughputTopic), 64);
  ASSERT_TRUE(wait_until([&] {return pub->connected_count() == 1;}, 5s));
  auto start = Clock::now();
  for (int i = 0; i < 50; ++i) {
    pub->publish(Bytes(49152, 7));
    std::this_thread::sleep_until(start + (i + 1) * 100ms);
  }
  std::vector<double> rates;
  while (auto env = tp->try_next()) {
    auto st = netmon::decode_stats(ByteView(env->payload));
    ASSERT_TRUE(st);
    rates.push_back(st->bytes_per_s_in);
  }
  ASSERT_GE(rates.size(), 4u);
  // Samples taken while the stream was steady: skip the first, ramping one.
  for (std::size_t i = 1; i < rates.size(); ++i) {
    EXPECT_NEAR(rates[i], 491520.0, 491520.0 * 0.15) << "sample " << i;
  }
}

}  // namespace
}  // namespace fog::bridge
