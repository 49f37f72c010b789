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

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <set>
#include <thread>

#include "fog/common/error.hpp"
#include "fog/node/node.hpp"
#include "fog/registry/registry.hpp"
#include "support/wait.hpp"

namespace fog::registry
{
namespace
{

using namespace std::chrono_literals;

Endpoint ep(const std::string & name, std::uint16_t port)
{
  Endpoint e;
  e.node_name = name;
  e.address = "127.0.0.1:" + std::to_string(port);
  e.node_id = NodeId::random();
  return e;
}

std::set<NodeId> ids(const std::vector<Endpoint> & eps)
{
  std::set<NodeId> out;
  for (const auto & e : eps) {
    out.insert(e.node_id);
  }
  return out;
}

TEST(Registry, RegisterPublisherOnEmptyReturnsNothing)
{
  Registry reg;
  EXPECT_TRUE(reg.register_publisher(TopicName("/t"), ep("P", 1)).empty());
}

TEST(Registry, RegisterPublisherReturnsSubscribers)
{
  Registry reg;
  auto s = ep("S", 2);
  reg.register_subscriber(TopicName("/t"), s);
  auto peers = reg.register_publisher(TopicName("/t"), ep("P", 1));
  ASSERT_EQ(peers.size(), 1u);
  EXPECT_EQ(peers[0], s);
}

TEST(Registry, RegisterSubscriberReturnsPublishers)
{
  Registry reg;
  auto p = ep("P", 1);
  reg.register_publisher(TopicName("/t"), p);
  auto peers = reg.register_subscriber(TopicName("/t"), ep("S", 2));
  ASSERT_EQ(peers.size(), 1u);
  EXPECT_EQ(peers[0], p);
}

TEST(Registry, RegistrationOrderDoesNotChangePeerSet)
{
  auto p1 = ep("P1", 1);
  auto p2 = ep("P2", 2);
  auto s = ep("S", 3);
  Registry a;
  a.register_publisher(TopicName("/t"), p1);
  a.register_publisher(TopicName("/t"), p2);
  Registry b;
  b.register_publisher(TopicName("/t"), p2);
  b.register_publisher(TopicName("/t"), p1);
  auto ra = a.register_subscriber(TopicName("/t"), s);
  auto rb = b.register_subscriber(TopicName("/t"), s);
  EXPECT_EQ(ids(ra), ids(rb));
  EXPECT_EQ(ids(ra), (std::set<NodeId>{p1.node_id, p2.node_id}));
}

TEST(Registry, DuplicateRegistrationIsIdempotent)
{
  std::vector<proto::PeerChange> notes;
  Registry reg([&](const NodeId &, const proto::PeerChange & c) {notes.push_back(c);});
  auto s = ep("S", 2);
  auto p = ep("P", 1);
  reg.register_subscriber(TopicName("/t"), s);
  auto first = reg.register_publisher(TopicName("/t"), p);
  auto table = reg.snapshot_topics();
  auto second = reg.register_publisher(TopicName("/t"), p);
  EXPECT_EQ(first, second);
  EXPECT_EQ(table, reg.snapshot_topics());
  EXPECT_EQ(notes.size(), 1u);
}

TEST(Registry, NotifiesExistingSubscribersOfNewPublisher)
{
  std::vector<std::pair<NodeId, proto::PeerChange>> notes;
  Registry reg([&](const NodeId & to, const proto::PeerChange & c) {notes.emplace_back(to, c);});
  auto s = ep("S", 2);
  auto p = ep("P", 1);
  reg.register_subscriber(TopicName("/t"), s);
  reg.register_publisher(TopicName("/t"), p);
  ASSERT_EQ(notes.size(), 1u);
  EXPECT_EQ(notes[0].first, s.node_id);
  EXPECT_TRUE(notes[0].second.added);
  EXPECT_EQ(notes[0].second.role, Role::kPublisher);
  EXPECT_EQ(notes[0].second.endpoint, p);
}

TEST(Registry, UnregisterUnknownIsNoop)
{
  Registry reg;
  reg.register_publisher(TopicName("/a"), ep("P", 1));
  auto before = reg.snapshot_topics();
  reg.unregister(TopicName("/a"), NodeId::random(), Role::kPublisher);
  reg.unregister(TopicName("/zzz"), NodeId::random(), Role::kSubscriber);
  EXPECT_EQ(before, reg.snapshot_topics());
}

TEST(Registry, UnregisterRemovesEmptyTopic)
{
  Registry reg;
  auto p = ep("P", 1);
  reg.register_publisher(TopicName("/t"), p);
  reg.unregister(TopicName("/t"), p.node_id, Role::kPublisher);
  EXPECT_TRUE(reg.snapshot_topics().topics.empty());
}

TEST(Registry, SnapshotShape)
{
  Registry reg;
  EXPECT_TRUE(reg.snapshot_topics().topics.empty());
  auto p = ep("P", 1);
  auto s = ep("S", 2);
  reg.register_publisher(TopicName("/a"), p);
  reg.register_subscriber(TopicName("/b"), s);
  RegistryTable expected;
  expected.topics[TopicName("/a")].publishers[p.node_id] = p;
  expected.topics[TopicName("/b")].subscribers[s.node_id] = s;
  EXPECT_EQ(reg.snapshot_topics(), expected);
}

TEST(Registry, SnapshotsDuringConcurrentRegistrationAreConsistent)
{
  Registry reg;
  constexpr int kThreads = 10;
  constexpr int kPerThread = 10;
  std::vector<std::vector<std::pair<TopicName, Endpoint>>> plans(kThreads);
  std::map<NodeId, std::pair<TopicName, Endpoint>> all;
  for (int t = 0; t < kThreads; ++t) {
    for (int i = 0; i < kPerThread; ++i) {
      TopicName topic("/topic" + std::to_string(i % 7));
      auto e = ep("n" + std::to_string(t) + "_" + std::to_string(i), 1000 + t * 100 + i);
      plans[t].emplace_back(topic, e);
      all.emplace(e.node_id, std::make_pair(topic, e));
    }
  }
  std::atomic<bool> go{false};
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
        while (!go) {}
        for (auto & [topic, e] : plans[t]) {
          if (e.node_name.back() % 2 == 0) {
            reg.register_publisher(topic, e);
          } else {
            reg.register_subscriber(topic, e);
          }
        }
      });
  }
  std::vector<RegistryTable> snaps;
  go = true;
  for (int i = 0; i < 200; ++i) {
    snaps.push_back(reg.snapshot_topics());
  }
  for (auto & th : threads) {
    th.join();
  }
  snaps.push_back(reg.snapshot_topics());

  auto count = [](const RegistryTable & t) {
      std::size_t n = 0;
      for (auto & [topic, rec] : t.topics) {
        n += rec.publishers.size() + rec.subscribers.size();
      }
      return n;
    };
  EXPECT_EQ(count(snaps.back()), all.size());
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    for (auto & [topic, rec] : snaps[i].topics) {
      EXPECT_FALSE(rec.empty());
      for (Role role : {Role::kPublisher, Role::kSubscriber}) {
        for (auto & [id, e] : rec.role(role)) {
          // Every entry is exactly something that was registered, in the right place.
          auto it = all.find(id);
          ASSERT_NE(it, all.end());
          EXPECT_EQ(it->second.first, topic);
          EXPECT_EQ(it->second.second, e);
          // Registrations only grow, so each later snapshot contains this entry.
          if (i + 1 < snaps.size()) {
            EXPECT_TRUE(snaps[i + 1].has(topic, role));
            EXPECT_EQ(snaps[i + 1].topics.at(topic).role(role).count(id), 1u);
          }
        }
      }
    }
  }
}

// --- Server-level behaviour ------------------------------------------------

TEST(RegistryServer, SnapshotOverTheWire)
{
  RegistryServer server;
  server.start();
  EXPECT_TRUE(query_snapshot(server.address()).topics.empty());
  auto p = ep("P", 1);
  server.registry().register_publisher(TopicName("/a"), p);
  auto table = query_snapshot(server.address());
  ASSERT_EQ(table.topics.size(), 1u);
  EXPECT_EQ(table.topics.begin()->second.publishers.at(p.node_id), p);
}

TEST(RegistryServer, UnreachableRegistryIsTyped)
{
  net::Address nowhere{"127.0.0.1", 1};
  try {
    query_snapshot(nowhere, 300ms);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), ErrorCode::kRegistryUnavailable);
  }
}

// Runs a node in a child process that registers /crash as publisher, then
// blocks forever. Returns the child pid.
pid_t spawn_registered_child(const net::Address & master)
{
  pid_t pid = ::fork();
  if (pid == 0) {
    node::NodeOptions o;
    o.name = "child";
    o.master = master;
    auto n = node::Node::create(o);
    auto pub = n->advertise(TopicName("/crash"));
    for (;;) {
      ::pause();
    }
  }
  return pid;
}

TEST(RegistryServer, CrashedNodeIsExpunged)
{
  ServerOptions opts;
  opts.liveness_timeout = 1000ms;
  RegistryServer server(opts);
  server.start();
  pid_t child = spawn_registered_child(server.address());
  ASSERT_TRUE(testing::wait_until([&] {return !server.snapshot_topics().topics.empty();}, 5s));
  ::kill(child, SIGKILL);
  ::waitpid(child, nullptr, 0);
  EXPECT_TRUE(testing::wait_until([&] {return server.snapshot_topics().topics.empty();}, 2000ms));
}

TEST(RegistryServer, SilentNodeExpiresWithinTwiceTheLivenessTimeout)
{
  ServerOptions opts;
  opts.liveness_timeout = 1000ms;
  RegistryServer server(opts);
  server.start();
  pid_t child = spawn_registered_child(server.address());
  ASSERT_TRUE(testing::wait_until([&] {return !server.snapshot_topics().topics.empty();}, 5s));
  // A stopped process keeps its socket open but stops heartbeating.
  ::kill(child, SIGSTOP);
  auto start = std::chrono::steady_clock::now();
  bool gone = testing::wait_until([&] {return server.snapshot_topics().topics.empty();}, 2000ms);
  auto took = std::chrono::steady_clock::now() - start;
  ::kill(child, SIGKILL);
  ::waitpid(child, nullptr, 0);
  EXPECT_TRUE(gone);
  EXPECT_LE(took, 2000ms + 100ms);
}

}  // namespace
}  // namespace fog::registry
