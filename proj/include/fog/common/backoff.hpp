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

#ifndef FOG__COMMON__BACKOFF_HPP_
#define FOG__COMMON__BACKOFF_HPP_

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>

namespace fog
{

struct BackoffPolicy
{
  std::chrono::milliseconds initial{200};
  double factor{2.0};
  std::chrono::milliseconds cap{5000};
  double jitter{0.2};
  /// Give up once this much time has elapsed since the first failure.
  std::optional<std::chrono::milliseconds> max_elapsed;
};

/// Exponential backoff with symmetric multiplicative jitter.
class Backoff
{
public:
  explicit Backoff(BackoffPolicy policy = {});

  /// Delay to wait before the next attempt, or nullopt when the policy gives up.
  std::optional<std::chrono::milliseconds> next();
  void reset();
  std::uint32_t attempts() const {return attempts_;}

  /// Un-jittered delay for the given attempt index (0-based).
  std::chrono::milliseconds nominal(std::uint32_t attempt) const;

private:
  BackoffPolicy policy_;
  std::uint32_t attempts_{0};
  std::optional<std::chrono::steady_clock::time_point> first_failure_;
  std::mt19937_64 rng_;
};

}  // namespace fog

#endif  // FOG__COMMON__BACKOFF_HPP_
