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

#ifndef FOG__BRIDGE__CHANNEL_HPP_
#define FOG__BRIDGE__CHANNEL_HPP_

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "fog/common/bytes.hpp"
#include "fog/common/error.hpp"
#include "fog/net/socket.hpp"
#include "fog/wire/codec.hpp"

namespace fog::bridge
{

using Secret = std::array<std::uint8_t, 32>;
using Nonce = std::array<std::uint8_t, 32>;
using Key = std::array<std::uint8_t, 32>;

Secret generate_secret();
std::string secret_to_hex(const Secret & s);
/// Throws Error(kChannelAuthFailure) on malformed input.
Secret secret_from_hex(std::string_view hex);
/// Short public identifier of a secret, safe to log or store.
std::string secret_id(const Secret & s);

enum class ChannelRole
{
  kInitiator,
  kResponder,
};

struct SessionKeys
{
  Key initiator_to_responder{};
  Key responder_to_initiator{};
};

/// Keys for both directions, keyed by the secret over both nonces.
SessionKeys derive_session_keys(const Secret & secret, const Nonce & ni, const Nonce & nr);
std::string key_id(const Key & key);
/// Challenge responses proving knowledge of the secret.
Key responder_proof(const Secret & secret, const Nonce & ni, const Nonce & nr);
Key initiator_proof(const Secret & secret, const Nonce & ni, const Nonce & nr);

/// CTRL opcodes carried inside the channel (the registry owns 1..15).
enum class ChannelOp : std::uint8_t
{
  kAuth = 16,
  kSummary = 17,
};

struct KindCounts
{
  std::array<std::uint64_t, wire::kFrameKindCount> frames{};
  /// Payload bytes of DATA frames only.
  std::uint64_t data_payload_bytes{0};

  std::uint64_t of(wire::FrameKind k) const {return frames[static_cast<std::size_t>(k)];}
};

/// Authenticated, encrypted frame stream between the two proxy endpoints.
///
/// Each record is `length:4 | counter:8 | ciphertext`, sealed with the
/// direction's key and the counter as associated data. Counters start at 1
/// and must strictly increase.
class SecureChannel
{
public:
  /// Runs the mutual challenge-response. Throws Error(kChannelAuthFailure)
  /// on a proof mismatch and Error(kChannelDown) on timeout or disconnect.
  static std::unique_ptr<SecureChannel> handshake(
    net::Socket sock, const Secret & secret, ChannelRole role,
    std::chrono::milliseconds timeout, const std::optional<Nonce> & nonce = std::nullopt);

  ~SecureChannel();
  SecureChannel(const SecureChannel &) = delete;
  SecureChannel & operator=(const SecureChannel &) = delete;

  /// Seals and writes one frame. Safe from several threads. Throws Error(kChannelDown).
  void send(const wire::Frame & frame);
  void send_encoded(wire::FrameKind kind, ByteView frame_bytes, std::size_t payload_bytes);

  /// Next frame or nullopt on timeout. Single reader only. Throws
  /// Error(kChannelDown), Error(kChannelAuthFailure) or Error(kReplayDetected);
  /// any error closes the channel.
  std::optional<wire::Frame> receive(std::chrono::milliseconds timeout);

  ChannelRole role() const {return role_;}
  const std::string & send_key_id() const {return send_key_id_;}
  const std::string & recv_key_id() const {return recv_key_id_;}
  KindCounts sent() const;
  KindCounts received() const;
  bool is_down() const {return down_;}
  void shutdown();

private:
  SecureChannel(net::Socket sock, ChannelRole role);

  /// Reads until `n` bytes are buffered or throws.
  bool fill(std::size_t n, std::chrono::steady_clock::time_point deadline);
  wire::Frame read_plain_frame(std::chrono::steady_clock::time_point deadline);
  [[noreturn]] void fail(ErrorCode code, const std::string & why);

  net::Socket sock_;
  ChannelRole role_;
  Key send_key_{};
  Key recv_key_{};
  std::string send_key_id_;
  std::string recv_key_id_;

  std::mutex send_mu_;
  std::uint64_t send_counter_{0};
  std::uint64_t recv_counter_{0};
  Bytes rx_;
  std::size_t rx_start_{0};

  mutable std::mutex stats_mu_;
  KindCounts sent_;
  KindCounts received_;
  std::atomic<bool> down_{false};
};

}  // namespace fog::bridge

#endif  // FOG__BRIDGE__CHANNEL_HPP_
