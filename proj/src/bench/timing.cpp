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

#include "fog/bench/timing.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "fog/common/error.hpp"

namespace fog::bench
{

TimingRow make_timing_row(const std::string & scenario, double edge_only_s,
  double cloud_compute_s, double network_s)
{
  for (double v : {edge_only_s, cloud_compute_s, network_s}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::kNegativeInput, "timing inputs must be finite and nonnegative");
    }
  }
  TimingRow r;
  r.scenario = scenario;
  r.edge_only_s = edge_only_s;
  r.cloud_compute_s = cloud_compute_s;
  r.network_s = network_s;
  r.total_s = cloud_compute_s + network_s;
  if (r.total_s > 0.0) {
    r.speedup = edge_only_s / r.total_s;
  } else {
    r.speedup = edge_only_s == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return r;
}

std::string render_table(const std::vector<TimingRow> & rows)
{
  std::size_t w = 8;
  for (const auto & r : rows) {
    w = std::max(w, r.scenario.size());
  }
  std::string out = fmt::format("{:<{}}  {:>10}  {:>10}  {:>10}  {:>10}  {:>8}\n",
      "Scenario", w, "Edge Only", "Compute", "Network", "Total", "Speedup");
  out += std::string(w + 2 + 4 * 12 + 8, '-') + "\n";
  for (const auto & r : rows) {
    out += fmt::format("{:<{}}  {:>10.3f}  {:>10.3f}  {:>10.3f}  {:>10.3f}  {:>7.2f}x\n",
        r.scenario, w, r.edge_only_s, r.cloud_compute_s, r.network_s, r.total_s, r.speedup);
  }
  return out;
}

std::string render_csv(const std::vector<TimingRow> & rows)
{
  std::string out = "scenario,edge_only_s,cloud_compute_s,network_s,total_s,speedup\n";
  for (const auto & r : rows) {
    out += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n",
        r.scenario, r.edge_only_s, r.cloud_compute_s, r.network_s, r.total_s, r.speedup);
  }
  return out;
}

const std::vector<PublishedRow> & published_rows()
{
  static const std::vector<PublishedRow> rows = {
    {"grasp planning", "Compressed", "vpc", 7.3, 0.6, 0.6, 1.2},
    {"grasp planning", "Compressed", "proxy", 7.3, 0.6, 0.8, 1.4},
    {"grasp planning", "Uncompressed", "vpc", 7.5, 0.6, 0.7, 1.3},
    {"grasp planning", "Uncompressed", "proxy", 7.5, 0.6, 0.9, 1.5},
    {"motion planning", "Apartment", "vpc", 157.6, 4.2, 0.4, 4.6},
    {"motion planning", "Apartment", "proxy", 157.6, 4.2, 0.7, 5.0},
    {"motion planning", "Cubicles", "vpc", 35.8, 1.4, 0.3, 1.7},
    {"motion planning", "Cubicles", "proxy", 35.8, 1.4, 0.6, 2.1},
    {"motion planning", "Home", "vpc", 161.8, 6.2, 0.3, 6.5},
    {"motion planning", "Home", "proxy", 161.8, 6.2, 0.6, 6.8},
    {"motion planning", "TwistyCool", "vpc", 167.9, 5.1, 0.4, 5.5},
    {"motion planning", "TwistyCool", "proxy", 167.9, 5.1, 0.6, 5.7},
  };
  return rows;
}

}  // namespace fog::bench
