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

#ifndef FOG__BENCH__KERNEL_HPP_
#define FOG__BENCH__KERNEL_HPP_

#include <chrono>
#include <cstdint>

namespace fog::bench
{

/// Wrapping sum of splitmix64(seed + i) for i in [begin, end).
std::uint64_t kernel_range(std::uint64_t seed, std::uint64_t begin, std::uint64_t end);

struct KernelRun
{
  std::uint64_t value{0};
  std::chrono::nanoseconds elapsed{0};
};

/// Runs the kernel split across `workers` threads. Each thread behaves as a
/// simulated core that may use `core_share` of one host core: after every
/// chunk it sleeps until its wall time is its CPU time divided by the share.
/// The value does not depend on `workers` or `core_share`.
KernelRun run_kernel(std::uint64_t seed, std::uint64_t iterations, int workers, double core_share = 1.0);

/// Iterations that take about `seconds` on one simulated core of `core_share`.
std::uint64_t calibrate_iterations(double seconds, double core_share);

}  // namespace fog::bench

#endif  // FOG__BENCH__KERNEL_HPP_
