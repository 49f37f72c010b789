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

#include "fog/bench/kernel.hpp"

#include <time.h>

#include <algorithm>
#include <thread>
#include <vector>

namespace fog::bench
{
namespace
{

constexpr std::uint64_t kChunk = 1 << 16;

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::chrono::nanoseconds thread_cpu()
{
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return std::chrono::seconds(ts.tv_sec) + std::chrono::nanoseconds(ts.tv_nsec);
}

}  // namespace

std::uint64_t kernel_range(std::uint64_t seed, std::uint64_t begin, std::uint64_t end)
{
  std::uint64_t acc = 0;
  for (std::uint64_t i = begin; i < end; ++i) {
    acc += splitmix64(seed + i);
  }
  return acc;
}

KernelRun run_kernel(std::uint64_t seed, std::uint64_t iterations, int workers, double core_share)
{
  workers = std::max(1, workers);
  core_share = std::clamp(core_share, 1e-3, 1.0);
  auto start = std::chrono::steady_clock::now();
  std::vector<std::uint64_t> partial(static_cast<std::size_t>(workers), 0);
  auto work = [&](int w) {
      std::uint64_t begin = iterations * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
      std::uint64_t end = iterations * static_cast<std::uint64_t>(w + 1) / static_cast<std::uint64_t>(workers);
      auto wall0 = std::chrono::steady_clock::now();
      auto cpu0 = thread_cpu();
      std::uint64_t acc = 0;
      for (std::uint64_t b = begin; b < end; b += kChunk) {
        acc += kernel_range(seed, b, std::min(end, b + kChunk));
        if (core_share < 1.0) {
          auto used = thread_cpu() - cpu0;
          auto due = wall0 + std::chrono::duration_cast<std::chrono::nanoseconds>(used / core_share);
          std::this_thread::sleep_until(due);
        }
      }
      partial[static_cast<std::size_t>(w)] = acc;
    };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back(work, w);
    }
    for (auto & t : threads) {
      t.join();
    }
  }
  KernelRun out;
  for (auto p : partial) {
    out.value += p;
  }
  out.elapsed = std::chrono::steady_clock::now() - start;
  return out;
}

std::uint64_t calibrate_iterations(double seconds, double core_share)
{
  constexpr std::uint64_t kProbe = 1 << 22;
  auto cpu0 = thread_cpu();
  volatile std::uint64_t sink = kernel_range(12345, 0, kProbe);
  (void)sink;
  auto cpu = std::chrono::duration<double>(thread_cpu() - cpu0).count();
  double per_second = static_cast<double>(kProbe) / std::max(cpu, 1e-6);
  return static_cast<std::uint64_t>(per_second * seconds * core_share);
}

}  // namespace fog::bench
