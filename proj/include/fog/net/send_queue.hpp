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

#ifndef FOG__NET__SEND_QUEUE_HPP_
#define FOG__NET__SEND_QUEUE_HPP_

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <limits>
#include <mutex>
#include <optional>

#include "fog/common/bytes.hpp"

namespace fog::net
{

/// Queue of items waiting for a writer thread. Bounded queues drop the
/// oldest item when full.
template<typename T>
class BasicSendQueue
{
public:
  explicit BasicSendQueue(std::size_t capacity = std::numeric_limits<std::size_t>::max())
  : capacity_(capacity) {}

  void push(T frame)
  {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (closed_) {
        return;
      }
      if (q_.size() >= capacity_) {
        q_.pop_front();
        ++dropped_;
      }
      q_.push_back(std::move(frame));
    }
    cv_.notify_one();
  }

  /// Blocks until a frame is available, the queue closes, or the timeout passes.
  std::optional<T> pop(std::chrono::milliseconds timeout)
  {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait_for(lock, timeout, [this] {return closed_ || !q_.empty();});
    if (q_.empty()) {
      return std::nullopt;
    }
    T out = std::move(q_.front());
    q_.pop_front();
    return out;
  }

  void clear()
  {
    std::lock_guard<std::mutex> lock(mu_);
    dropped_ += q_.size();
    q_.clear();
  }

  void close()
  {
    {
      std::lock_guard<std::mutex> lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool closed() const
  {
    std::lock_guard<std::mutex> lock(mu_);
    return closed_;
  }

  std::size_t dropped() const
  {
    std::lock_guard<std::mutex> lock(mu_);
    return dropped_;
  }

private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> q_;
  std::size_t capacity_;
  std::size_t dropped_{0};
  bool closed_{false};
};

/// Encoded frames.
using SendQueue = BasicSendQueue<Bytes>;

}  // namespace fog::net

#endif  // FOG__NET__SEND_QUEUE_HPP_
