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

#ifndef SUPPORT__PROXY_PAIR_HPP_
#define SUPPORT__PROXY_PAIR_HPP_

#include <memory>
#include <string>

#include "fog/bridge/proxy.hpp"
#include "fog/registry/registry.hpp"
#include "support/relay.hpp"

namespace fog::testing
{

/// Two registries joined by a proxy pair whose channel runs through a relay.
struct ProxyPair
{
  explicit ProxyPair(bridge::TopicPolicy policy = bridge::TopicPolicy::automatic(),
    bridge::Secret edge_secret = bridge::generate_secret(),
    std::optional<bridge::Secret> cloud_secret = std::nullopt)
  {
    edge_registry = std::make_unique<registry::RegistryServer>();
    cloud_registry = std::make_unique<registry::RegistryServer>();
    edge_registry->start();
    cloud_registry->start();

    bridge::ProxyOptions c;
    c.name = "proxy_cloud";
    c.side = wire::Origin::kCloud;
    c.role = bridge::ChannelRole::kResponder;
    c.registry = cloud_registry->address();
    c.secret = cloud_secret.value_or(edge_secret);
    c.policy = policy;
    cloud = std::make_unique<bridge::ProxyEndpoint>(c);

    relay = std::make_unique<TcpRelay>(cloud->channel_address());

    bridge::ProxyOptions e;
    e.name = "proxy_edge";
    e.side = wire::Origin::kEdge;
    e.role = bridge::ChannelRole::kInitiator;
    e.registry = edge_registry->address();
    e.peer = relay->address();
    e.secret = edge_secret;
    e.policy = policy;
    edge = std::make_unique<bridge::ProxyEndpoint>(e);

    cloud->start();
    edge->start();
  }

  ~ProxyPair()
  {
    edge.reset();
    cloud.reset();
    relay.reset();
  }

  std::shared_ptr<node::Node> node(wire::Origin side, const std::string & name, bool trace = false)
  {
    node::NodeOptions o;
    o.name = name;
    o.origin = side;
    o.trace = trace;
    o.master = side == wire::Origin::kEdge ? edge_registry->address() : cloud_registry->address();
    return node::Node::create(o);
  }

  std::unique_ptr<registry::RegistryServer> edge_registry;
  std::unique_ptr<registry::RegistryServer> cloud_registry;
  std::unique_ptr<bridge::ProxyEndpoint> cloud;
  std::unique_ptr<TcpRelay> relay;
  std::unique_ptr<bridge::ProxyEndpoint> edge;
};

}  // namespace fog::testing

#endif  // SUPPORT__PROXY_PAIR_HPP_
