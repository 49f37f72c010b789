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

#include "fog/bridge/channel.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>

#include "fog/common/ids.hpp"
#include "fog/common/log.hpp"

namespace fog::bridge
{
namespace
{

using Clock = std::chrono::steady_clock;

constexpr std::uint8_t kHelloInit = 3;
constexpr std::uint8_t kHelloResp = 4;
constexpr std::size_t kRecordPrefix = 4 + 8;
constexpr std::size_t kTagSize = crypto_aead_chacha20poly1305_ietf_ABYTES;
constexpr std::size_t kMaxRecord = 8 + kTagSize + wire::kHeaderSize + wire::kMaxBody;

void ensure_sodium()
{
  static const int rc = sodium_init();
  if (rc < 0) {
    throw Error(ErrorCode::kIo, "libsodium initialisation failed");
  }
}

Key hmac(ByteView key, std::initializer_list<ByteView> parts)
{
  ensure_sodium();
  crypto_auth_hmacsha256_state st;
  crypto_auth_hmacsha256_init(&st, key.data(), key.size());
  for (auto p : parts) {
    crypto_auth_hmacsha256_update(&st, p.data(), p.size());
  }
  Key out{};
  crypto_auth_hmacsha256_final(&st, out.data());
  return out;
}

ByteView label(const char * s)
{
  return ByteView(reinterpret_cast<const std::uint8_t *>(s), std::strlen(s));
}

std::array<std::uint8_t, crypto_aead_chacha20poly1305_ietf_NPUBBYTES> record_nonce(std::uint64_t counter)
{
  std::array<std::uint8_t, crypto_aead_chacha20poly1305_ietf_NPUBBYTES> n{};
  put_u64_be(n.data() + n.size() - 8, counter);
  return n;
}

}  // namespace

Secret generate_secret()
{
  ensure_sodium();
  Secret s{};
  randombytes_buf(s.data(), s.size());
  return s;
}

std::string secret_to_hex(const Secret & s)
{
  return to_hex(s.data(), s.size());
}

Secret secret_from_hex(std::string_view hex)
{
  auto bytes = from_hex_bytes(hex);
  if (!bytes || bytes->size() != 32) {
    throw Error(ErrorCode::kChannelAuthFailure, "secret must be 64 hex characters");
  }
  Secret s{};
  std::copy(bytes->begin(), bytes->end(), s.begin());
  return s;
}

std::string secret_id(const Secret & s)
{
  auto h = hmac(ByteView(s), {label("fog secret id")});
  return to_hex(h.data(), 8);
}

SessionKeys derive_session_keys(const Secret & secret, const Nonce & ni, const Nonce & nr)
{
  SessionKeys k;
  k.initiator_to_responder = hmac(ByteView(secret), {label("fog key i2r"), ByteView(ni), ByteView(nr)});
  k.responder_to_initiator = hmac(ByteView(secret), {label("fog key r2i"), ByteView(ni), ByteView(nr)});
  return k;
}

std::string key_id(const Key & key)
{
  auto h = hmac(ByteView(key), {label("fog key id")});
  return to_hex(h.data(), 8);
}

Key responder_proof(const Secret & secret, const Nonce & ni, const Nonce & nr)
{
  return hmac(ByteView(secret), {label("fog resp"), ByteView(ni), ByteView(nr)});
}

Key initiator_proof(const Secret & secret, const Nonce & ni, const Nonce & nr)
{
  return hmac(ByteView(secret), {label("fog init"), ByteView(ni), ByteView(nr)});
}

SecureChannel::SecureChannel(net::Socket sock, ChannelRole role)
: sock_(std::move(sock)), role_(role)
{
}

SecureChannel::~SecureChannel()
{
  sodium_memzero(send_key_.data(), send_key_.size());
  sodium_memzero(recv_key_.data(), recv_key_.size());
}

std::unique_ptr<SecureChannel> SecureChannel::handshake(
  net::Socket sock, const Secret & secret, ChannelRole role,
  std::chrono::milliseconds timeout, const std::optional<Nonce> & nonce)
{
  ensure_sodium();
  std::unique_ptr<SecureChannel> ch(new SecureChannel(std::move(sock), role));
  auto deadline = Clock::now() + timeout;
  Nonce mine{};
  if (nonce) {
    mine = *nonce;
  } else {
    randombytes_buf(mine.data(), mine.size());
  }
  Nonce ni{}, nr{};
  auto auth_fail = [&](const char * why) {
      ch->fail(ErrorCode::kChannelAuthFailure, why);
    };

  if (role == ChannelRole::kInitiator) {
    ni = mine;
    ByteWriter w;
    w.u8(kHelloInit);
    w.raw(ByteView(ni));
    ch->sock_.send_all(ByteView(wire::encode_control(wire::FrameKind::kHello, ByteView(w.take()))));

    auto reply = ch->read_plain_frame(deadline);
    const auto & body = reply.control().bytes;
    if (reply.kind != wire::FrameKind::kHello || body.size() != 1 + 32 + 32 || body[0] != kHelloResp) {
      auth_fail("unexpected handshake reply");
    }
    std::copy_n(body.begin() + 1, 32, nr.begin());
    auto expect = responder_proof(secret, ni, nr);
    if (sodium_memcmp(expect.data(), body.data() + 33, 32) != 0) {
      auth_fail("responder proof mismatch");
    }
    ByteWriter a;
    a.u8(static_cast<std::uint8_t>(ChannelOp::kAuth));
    auto proof = initiator_proof(secret, ni, nr);
    a.raw(ByteView(proof));
    ch->sock_.send_all(ByteView(wire::encode_control(wire::FrameKind::kCtrl, ByteView(a.take()))));
  } else {
    nr = mine;
    wire::Frame hello;
    try {
      hello = ch->read_plain_frame(deadline);
    } catch (const Error & e) {
      if (e.code() == ErrorCode::kChannelDown) {
        throw;
      }
      auth_fail("malformed handshake");
    }
    const auto & body = hello.control().bytes;
    if (hello.kind != wire::FrameKind::kHello || body.size() != 33 || body[0] != kHelloInit) {
      auth_fail("unexpected handshake hello");
    }
    std::copy_n(body.begin() + 1, 32, ni.begin());
    ByteWriter w;
    w.u8(kHelloResp);
    w.raw(ByteView(nr));
    auto proof = responder_proof(secret, ni, nr);
    w.raw(ByteView(proof));
    ch->sock_.send_all(ByteView(wire::encode_control(wire::FrameKind::kHello, ByteView(w.take()))));

    wire::Frame auth;
    try {
      auth = ch->read_plain_frame(deadline);
    } catch (const Error &) {
      auth_fail("peer left during authentication");
    }
    const auto & ab = auth.control().bytes;
    auto expect = initiator_proof(secret, ni, nr);
    if (auth.kind != wire::FrameKind::kCtrl || ab.size() != 33 ||
      ab[0] != static_cast<std::uint8_t>(ChannelOp::kAuth) ||
      sodium_memcmp(expect.data(), ab.data() + 1, 32) != 0)
    {
      auth_fail("initiator proof mismatch");
    }
  }

  auto keys = derive_session_keys(secret, ni, nr);
  if (role == ChannelRole::kInitiator) {
    ch->send_key_ = keys.initiator_to_responder;
    ch->recv_key_ = keys.responder_to_initiator;
  } else {
    ch->send_key_ = keys.responder_to_initiator;
    ch->recv_key_ = keys.initiator_to_responder;
  }
  ch->send_key_id_ = key_id(ch->send_key_);
  ch->recv_key_id_ = key_id(ch->recv_key_);
  sodium_memzero(keys.initiator_to_responder.data(), 32);
  sodium_memzero(keys.responder_to_initiator.data(), 32);
  return ch;
}

void SecureChannel::fail(ErrorCode code, const std::string & why)
{
  down_ = true;
  sock_.shutdown();
  throw Error(code, "secure channel: " + why);
}

bool SecureChannel::fill(std::size_t n, Clock::time_point deadline)
{
  if (rx_start_ > 0 && rx_start_ * 2 > rx_.size()) {
    rx_.erase(rx_.begin(), rx_.begin() + static_cast<std::ptrdiff_t>(rx_start_));
    rx_start_ = 0;
  }
  std::uint8_t buf[65536];
  while (rx_.size() - rx_start_ < n) {
    auto now = Clock::now();
    if (now >= deadline) {
      return false;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    if (!sock_.wait_readable(std::max(left, std::chrono::milliseconds(1)))) {
      continue;
    }
    std::size_t got = 0;
    try {
      got = sock_.recv_some(buf, sizeof(buf));
    } catch (const Error & e) {
      fail(ErrorCode::kChannelDown, e.what());
    }
    if (got == 0) {
      fail(ErrorCode::kChannelDown, "peer closed the connection");
    }
    rx_.insert(rx_.end(), buf, buf + got);
  }
  return true;
}

wire::Frame SecureChannel::read_plain_frame(Clock::time_point deadline)
{
  while (true) {
    auto res = wire::decode_frame(ByteView(rx_).subspan(rx_start_));
    if (res.ok()) {
      rx_start_ += res.consumed;
      if (res.frame->kind == wire::FrameKind::kData) {
        fail(ErrorCode::kChannelAuthFailure, "data before authentication");
      }
      return std::move(*res.frame);
    }
    if (res.status != wire::DecodeStatus::kNeedMoreBytes) {
      fail(ErrorCode::kChannelAuthFailure, "malformed handshake frame");
    }
    if (res.needed > 4096) {
      fail(ErrorCode::kChannelAuthFailure, "oversized handshake frame");
    }
    if (!fill(res.needed, deadline)) {
      fail(ErrorCode::kChannelDown, "handshake timed out");
    }
  }
}

void SecureChannel::send(const wire::Frame & frame)
{
  std::size_t payload = frame.kind == wire::FrameKind::kData ? frame.envelope().payload.size() : 0;
  send_encoded(frame.kind, ByteView(wire::encode_frame(frame)), payload);
}

void SecureChannel::send_encoded(wire::FrameKind kind, ByteView frame_bytes, std::size_t payload_bytes)
{
  if (down_) {
    throw Error(ErrorCode::kChannelDown, "secure channel is down");
  }
  Bytes rec(kRecordPrefix + frame_bytes.size() + kTagSize);
  {
    std::lock_guard<std::mutex> lock(send_mu_);
    auto counter = ++send_counter_;
    put_u32_be(rec.data(), static_cast<std::uint32_t>(rec.size() - 4));
    put_u64_be(rec.data() + 4, counter);
    auto nonce = record_nonce(counter);
    unsigned long long clen = 0;
    crypto_aead_chacha20poly1305_ietf_encrypt(
      rec.data() + kRecordPrefix, &clen, frame_bytes.data(), frame_bytes.size(),
      rec.data() + 4, 8, nullptr, nonce.data(), send_key_.data());
    try {
      sock_.send_all(ByteView(rec));
    } catch (const Error & e) {
      down_ = true;
      sock_.shutdown();
      throw Error(ErrorCode::kChannelDown, std::string("secure channel: ") + e.what());
    }
  }
  std::lock_guard<std::mutex> lock(stats_mu_);
  ++sent_.frames[static_cast<std::size_t>(kind)];
  if (kind == wire::FrameKind::kData) {
    sent_.data_payload_bytes += payload_bytes;
  }
}

std::optional<wire::Frame> SecureChannel::receive(std::chrono::milliseconds timeout)
{
  if (down_) {
    throw Error(ErrorCode::kChannelDown, "secure channel is down");
  }
  auto deadline = Clock::now() + timeout;
  if (!fill(4, deadline)) {
    return std::nullopt;
  }
  auto len = get_u32_be(rx_.data() + rx_start_);
  if (len < 8 + kTagSize || len > kMaxRecord) {
    fail(ErrorCode::kChannelAuthFailure, "record length out of range");
  }
  // Once a record has started, wait for the rest of it regardless of timeout.
  if (!fill(4 + len, Clock::now() + std::chrono::seconds(30))) {
    fail(ErrorCode::kChannelDown, "record stalled");
  }
  const std::uint8_t * rec = rx_.data() + rx_start_;
  auto counter = get_u64_be(rec + 4);
  if (counter <= recv_counter_) {
    fail(ErrorCode::kReplayDetected, "record counter " + std::to_string(counter) +
      " does not exceed " + std::to_string(recv_counter_));
  }
  Bytes plain(len - 8 - kTagSize);
  unsigned long long mlen = 0;
  auto nonce = record_nonce(counter);
  if (crypto_aead_chacha20poly1305_ietf_decrypt(
      plain.data(), &mlen, nullptr, rec + kRecordPrefix, len - 8, rec + 4, 8,
      nonce.data(), recv_key_.data()) != 0)
  {
    fail(ErrorCode::kChannelAuthFailure, "record authentication failed");
  }
  rx_start_ += 4 + len;
  recv_counter_ = counter;
  auto res = wire::decode_frame(ByteView(plain));
  if (!res.ok() || res.consumed != plain.size()) {
    fail(ErrorCode::kChannelDown, "record does not hold exactly one frame");
  }
  {
    std::lock_guard<std::mutex> lock(stats_mu_);
    ++received_.frames[static_cast<std::size_t>(res.frame->kind)];
    if (res.frame->kind == wire::FrameKind::kData) {
      received_.data_payload_bytes += res.frame->envelope().payload.size();
    }
  }
  return std::move(res.frame);
}

KindCounts SecureChannel::sent() const
{
  std::lock_guard<std::mutex> lock(stats_mu_);
  return sent_;
}

KindCounts SecureChannel::received() const
{
  std::lock_guard<std::mutex> lock(stats_mu_);
  return received_;
}

void SecureChannel::shutdown()
{
  down_ = true;
  sock_.shutdown();
}

}  // namespace fog::bridge
