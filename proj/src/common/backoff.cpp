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

#include "fog/common/backoff.hpp"

#include <algorithm>
#include <cmath>

namespace fog
{

Backoff::Backoff(BackoffPolicy policy)
: policy_(policy), rng_(std::random_device{}())
{
}

std::chrono::milliseconds Backoff::nominal(std::uint32_t attempt) const
{
  double ms = static_cast<double>(policy_.initial.count()) *
    std::pow(policy_.factor, static_cast<double>(attempt));
  ms = std::min(ms, static_cast<double>(policy_.cap.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

std::optional<std::chrono::milliseconds> Backoff::next()
{
  auto now = std::chrono::steady_clock::now();
  if (!first_failure_) {
    first_failure_ = now;
  }
  if (policy_.max_elapsed && now - *first_failure_ >= *policy_.max_elapsed) {
    return std::nullopt;
  }
  auto base = static_cast<double>(nominal(attempts_).count());
  ++attempts_;
  std::uniform_real_distribution<double> dist(1.0 - policy_.jitter, 1.0 + policy_.jitter);
  return std::chrono::milliseconds(static_cast<std::int64_t>(base * dist(rng_)));
}

void Backoff::reset()
{
  attempts_ = 0;
  first_failure_.reset();
}

}  // namespace fog
