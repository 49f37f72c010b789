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

#ifndef FOG__BENCH__RUNNER_HPP_
#define FOG__BENCH__RUNNER_HPP_

#include <optional>
#include <string>
#include <vector>

#include "fog/bench/timing.hpp"
#include "fog/provision/local_provider.hpp"

namespace fog::bench
{

enum class Scenario
{
  kDirect,
  kProxy,
  kEdgeOnly,
};

std::string_view to_string(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view text);

struct BenchOptions
{
  /// Kernel iterations per request; 0 calibrates to `single_worker_s`.
  std::uint64_t iterations{0};
  /// Target compute time of one request on one simulated core.
  double single_worker_s{2.5};
  std::size_t frame_bytes{49152};
  int trials{5};
  std::string edge_only_type{"t2.micro"};
  std::string cloud_type{"c5.24xlarge"};
  std::chrono::milliseconds request_timeout{std::chrono::seconds(60)};
};

struct BenchSample
{
  std::uint64_t seq{0};
  double e2e_s{0.0};
  double compute_s{0.0};
  double network_s{0.0};
  std::size_t request_hops{0};
  std::size_t result_hops{0};
  std::uint64_t value{0};
};

struct BenchResult
{
  Scenario scenario{Scenario::kDirect};
  std::string instance_type;
  int workers{1};
  std::uint64_t iterations{0};
  std::vector<BenchSample> samples;
  double mean_e2e_s{0.0};
  double mean_compute_s{0.0};
  double mean_network_s{0.0};
};

/// Iterations that take `single_worker_s` on one simulated core of `type`.
std::uint64_t bench_iterations(const BenchOptions & options, const std::string & type);

/// Deploys a compute node for `scenario` (edge_only: a one-worker instance;
/// direct and proxy: the cloud type under that network mode), sends `trials`
/// requests one at a time from an edge driver and tears everything down.
/// network_s is end-to-end time minus the compute time the node reports.
/// Throws Error(kStepFailed) when the deployment fails.
BenchResult run_benchmark(Scenario scenario, const BenchOptions & options,
  provision::LocalProvider & provider);

/// Row for `result` against an edge-only mean end-to-end time.
TimingRow timing_row(const BenchResult & result, double edge_only_s);

}  // namespace fog::bench

#endif  // FOG__BENCH__RUNNER_HPP_
