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

#ifndef FOG__BENCH__TIMING_HPP_
#define FOG__BENCH__TIMING_HPP_

#include <string>
#include <vector>

namespace fog::bench
{

struct TimingRow
{
  std::string scenario;
  double edge_only_s{0.0};
  double cloud_compute_s{0.0};
  double network_s{0.0};
  double total_s{0.0};
  double speedup{0.0};
};

/// total = compute + network and speedup = edge_only / total. A zero total
/// gives speedup 1 when edge_only is also zero and infinity otherwise.
/// Throws Error(kNegativeInput) for negative or non-finite inputs.
TimingRow make_timing_row(const std::string & scenario, double edge_only_s,
  double cloud_compute_s, double network_s);

/// Aligned text table in the column order Edge Only, Cloud Compute, Network,
/// Total, Speedup.
std::string render_table(const std::vector<TimingRow> & rows);
std::string render_csv(const std::vector<TimingRow> & rows);

/// One published measurement row, with the totals as printed.
struct PublishedRow
{
  std::string table;
  std::string scenario;
  std::string mode;
  double edge_only_s;
  double cloud_compute_s;
  double network_s;
  double printed_total_s;
};

/// Rows of the offloading evaluation tables (grasp planning and motion
/// planning), one per scenario and network mode.
const std::vector<PublishedRow> & published_rows();

}  // namespace fog::bench

#endif  // FOG__BENCH__TIMING_HPP_
