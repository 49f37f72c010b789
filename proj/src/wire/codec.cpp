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

#include "fog/wire/codec.hpp"

#include <algorithm>
#include <cstring>

#include "fog/common/error.hpp"

namespace fog::wire
{

std::string_view to_string(FrameKind kind)
{
  switch (kind) {
    case FrameKind::kData: return "DATA";
    case FrameKind::kSub: return "SUB";
    case FrameKind::kUnsub: return "UNSUB";
    case FrameKind::kPing: return "PING";
    case FrameKind::kPong: return "PONG";
    case FrameKind::kHello: return "HELLO";
    case FrameKind::kStat: return "STAT";
    case FrameKind::kCtrl: return "CTRL";
  }
  return "?";
}

bool is_known_kind(std::uint8_t value)
{
  return value >= 1 && value <= 8;
}

std::string_view to_string(Origin origin)
{
  return origin == Origin::kEdge ? "edge" : "cloud";
}

std::optional<Origin> parse_origin(std::string_view text)
{
  if (text == "edge" || text == "EDGE") {return Origin::kEdge;}
  if (text == "cloud" || text == "CLOUD") {return Origin::kCloud;}
  return std::nullopt;
}

std::string_view to_string(DecodeStatus status)
{
  switch (status) {
    case DecodeStatus::kOk: return "Ok";
    case DecodeStatus::kNeedMoreBytes: return "NeedMoreBytes";
    case DecodeStatus::kBadMagic: return "BadMagic";
    case DecodeStatus::kUnsupportedVersion: return "UnsupportedVersion";
    case DecodeStatus::kUnknownKind: return "UnknownKind";
    case DecodeStatus::kOversizeDeclared: return "OversizeDeclared";
    case DecodeStatus::kMalformedBody: return "MalformedBody";
    case DecodeStatus::kInvalidTopic: return "InvalidTopic";
  }
  return "?";
}

namespace
{

void write_header(Bytes & out, FrameKind kind, std::size_t body_len)
{
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(kind));
  std::uint8_t len[4];
  put_u32_be(len, static_cast<std::uint32_t>(body_len));
  out.insert(out.end(), len, len + 4);
}

std::size_t envelope_body_size(const MessageEnvelope & env)
{
  std::size_t n = 1 + env.topic.str().size() + 16 + 8 + 8 + 1 + 1 + env.payload.size();
  for (const auto & hop : env.trace) {
    n += 1 + hop.size();
  }
  return n;
}

void check_envelope(const MessageEnvelope & env)
{
  if (env.payload.size() > kMaxPayload) {
    throw Error(ErrorCode::kOversizePayload,
            "payload of " + std::to_string(env.payload.size()) + " bytes exceeds limit");
  }
  if (!TopicName::is_valid(env.topic.str())) {
    throw Error(ErrorCode::kInvalidTopic, "invalid topic '" + env.topic.str() + "'");
  }
  if (env.trace.size() > kMaxTraceHops) {
    throw Error(ErrorCode::kInvalidTopic, "trace exceeds 8 hops");
  }
  for (const auto & hop : env.trace) {
    if (hop.size() > 255) {
      throw Error(ErrorCode::kInvalidTopic, "trace hop label exceeds 255 bytes");
    }
  }
}

std::optional<MessageEnvelope> decode_envelope(ByteView body, DecodeStatus & status)
{
  ByteReader r(body);
  MessageEnvelope env;
  std::string topic;
  if (!r.str8(topic)) {
    status = DecodeStatus::kMalformedBody;
    return std::nullopt;
  }
  auto parsed = TopicName::parse(topic);
  if (!parsed) {
    status = DecodeStatus::kInvalidTopic;
    return std::nullopt;
  }
  env.topic = std::move(*parsed);
  Bytes id;
  std::uint8_t origin = 0;
  std::uint8_t hops = 0;
  if (!r.raw(16, id) || !r.u64(env.seq) || !r.u64(env.timestamp_ns) || !r.u8(origin) ||
    !r.u8(hops) || origin > 1 || hops > kMaxTraceHops)
  {
    status = DecodeStatus::kMalformedBody;
    return std::nullopt;
  }
  std::copy(id.begin(), id.end(), env.publisher_id.bytes.begin());
  env.origin = static_cast<Origin>(origin);
  env.trace.resize(hops);
  for (auto & hop : env.trace) {
    if (!r.str8(hop)) {
      status = DecodeStatus::kMalformedBody;
      return std::nullopt;
    }
  }
  auto rest = r.rest();
  if (rest.size() > kMaxPayload) {
    status = DecodeStatus::kMalformedBody;
    return std::nullopt;
  }
  env.payload.assign(rest.begin(), rest.end());
  status = DecodeStatus::kOk;
  return env;
}

}  // namespace

std::size_t encoded_size(const MessageEnvelope & env)
{
  return kHeaderSize + envelope_body_size(env);
}

Bytes encode_data(const MessageEnvelope & env)
{
  check_envelope(env);
  Bytes out;
  out.reserve(encoded_size(env));
  write_header(out, FrameKind::kData, envelope_body_size(env));
  ByteWriter w(out);
  w.str8(env.topic.str());
  w.raw(ByteView(env.publisher_id.bytes));
  w.u64(env.seq);
  w.u64(env.timestamp_ns);
  w.u8(static_cast<std::uint8_t>(env.origin));
  w.u8(static_cast<std::uint8_t>(env.trace.size()));
  for (const auto & hop : env.trace) {
    w.str8(hop);
  }
  w.raw(ByteView(env.payload));
  return out;
}

Bytes encode_control(FrameKind kind, ByteView body)
{
  if (body.size() > kMaxBody) {
    throw Error(ErrorCode::kOversizePayload, "control body exceeds limit");
  }
  Bytes out;
  out.reserve(kHeaderSize + body.size());
  write_header(out, kind, body.size());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Bytes encode_frame(const Frame & frame)
{
  if (frame.kind == FrameKind::kData) {
    return encode_data(frame.envelope());
  }
  return encode_control(frame.kind, ByteView(frame.control().bytes));
}

DecodeResult decode_frame(ByteView bytes)
{
  DecodeResult result;
  if (bytes.empty()) {
    result.needed = kHeaderSize;
    return result;
  }
  const std::size_t magic_seen = std::min<std::size_t>(bytes.size(), 4);
  if (std::memcmp(bytes.data(), kMagic, magic_seen) != 0) {
    result.status = DecodeStatus::kBadMagic;
    return result;
  }
  if (bytes.size() >= 5 && bytes[4] != kVersion) {
    result.status = DecodeStatus::kUnsupportedVersion;
    return result;
  }
  if (bytes.size() >= 6 && !is_known_kind(bytes[5])) {
    result.status = DecodeStatus::kUnknownKind;
    return result;
  }
  if (bytes.size() < kHeaderSize) {
    result.status = DecodeStatus::kNeedMoreBytes;
    result.needed = kHeaderSize;
    return result;
  }
  const std::size_t length = get_u32_be(bytes.data() + 6);
  if (length > kMaxBody) {
    result.status = DecodeStatus::kOversizeDeclared;
    return result;
  }
  if (bytes.size() < kHeaderSize + length) {
    result.status = DecodeStatus::kNeedMoreBytes;
    result.needed = kHeaderSize + length;
    return result;
  }
  const auto kind = static_cast<FrameKind>(bytes[5]);
  auto body = bytes.subspan(kHeaderSize, length);
  Frame frame;
  frame.kind = kind;
  if (kind == FrameKind::kData) {
    DecodeStatus status = DecodeStatus::kOk;
    auto env = decode_envelope(body, status);
    if (!env) {
      result.status = status;
      return result;
    }
    frame.body = std::move(*env);
  } else {
    frame.body = ControlRecord{Bytes(body.begin(), body.end())};
  }
  result.status = DecodeStatus::kOk;
  result.frame = std::move(frame);
  result.consumed = kHeaderSize + length;
  return result;
}

void FrameBuffer::append(ByteView data)
{
  if (start_ > 0 && start_ == buf_.size()) {
    buf_.clear();
    start_ = 0;
  } else if (start_ > (1u << 20) && start_ * 2 > buf_.size()) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(start_));
    start_ = 0;
  }
  buf_.insert(buf_.end(), data.begin(), data.end());
}

DecodeResult FrameBuffer::next()
{
  auto result = decode_frame(ByteView(buf_).subspan(start_));
  if (result.ok()) {
    start_ += result.consumed;
  }
  return result;
}

}  // namespace fog::wire
