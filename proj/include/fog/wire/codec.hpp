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

#ifndef FOG__WIRE__CODEC_HPP_
#define FOG__WIRE__CODEC_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fog/common/bytes.hpp"
#include "fog/common/ids.hpp"
#include "fog/wire/topic.hpp"

namespace fog::wire
{

// Frame layout on every stream connection:
//
//   "FGRS" | version:1 | kind:1 | length:4 (big-endian) | body[length]
//
// DATA bodies carry one MessageEnvelope:
//
//   topic_len:1 | topic | publisher_id:16 | seq:8 | timestamp_ns:8 | origin:1 |
//   trace_count:1 | (label_len:1 | label) * trace_count | payload...

inline constexpr std::uint8_t kMagic[4] = {'F', 'G', 'R', 'S'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 10;
inline constexpr std::size_t kMaxPayload = (std::size_t{1} << 24) - 1;
inline constexpr std::size_t kMaxTraceHops = 8;
// Largest possible envelope without its payload: full topic, id, seq, stamp,
// origin, count and eight full-length hop labels.
inline constexpr std::size_t kMaxEnvelopeOverhead = 1 + 255 + 16 + 8 + 8 + 1 + 1 + 8 * 256;
inline constexpr std::size_t kMaxBody = kMaxPayload + kMaxEnvelopeOverhead;

enum class FrameKind : std::uint8_t
{
  kData = 1,
  kSub = 2,
  kUnsub = 3,
  kPing = 4,
  kPong = 5,
  kHello = 6,
  kStat = 7,
  kCtrl = 8,
};

inline constexpr std::size_t kFrameKindCount = 9;  // index 0 unused

std::string_view to_string(FrameKind kind);
bool is_known_kind(std::uint8_t value);

enum class Origin : std::uint8_t
{
  kEdge = 0,
  kCloud = 1,
};

std::string_view to_string(Origin origin);
std::optional<Origin> parse_origin(std::string_view text);
inline Origin opposite(Origin o) {return o == Origin::kEdge ? Origin::kCloud : Origin::kEdge;}

struct MessageEnvelope
{
  TopicName topic{"/_"};
  NodeId publisher_id;
  std::uint64_t seq{0};
  Origin origin{Origin::kEdge};
  std::uint64_t timestamp_ns{0};
  Bytes payload;
  std::vector<std::string> trace;

  bool operator==(const MessageEnvelope &) const = default;
};

/// Opaque body of any non-DATA frame; the layouts live with the modules that
/// speak them (registry, proxy channel, monitor).
struct ControlRecord
{
  Bytes bytes;

  bool operator==(const ControlRecord &) const = default;
};

struct Frame
{
  FrameKind kind{FrameKind::kCtrl};
  std::variant<MessageEnvelope, ControlRecord> body;

  bool operator==(const Frame &) const = default;

  const MessageEnvelope & envelope() const {return std::get<MessageEnvelope>(body);}
  const ControlRecord & control() const {return std::get<ControlRecord>(body);}
};

/// Encodes a DATA frame. Throws Error(kOversizePayload) or Error(kInvalidTopic).
Bytes encode_data(const MessageEnvelope & env);
/// Encodes a non-DATA frame around an opaque body.
Bytes encode_control(FrameKind kind, ByteView body);
Bytes encode_frame(const Frame & frame);

/// Size of the DATA frame `encode_data(env)` would produce.
std::size_t encoded_size(const MessageEnvelope & env);

enum class DecodeStatus
{
  kOk,
  kNeedMoreBytes,
  kBadMagic,
  kUnsupportedVersion,
  kUnknownKind,
  kOversizeDeclared,
  kMalformedBody,
  kInvalidTopic,
};

std::string_view to_string(DecodeStatus status);

struct DecodeResult
{
  DecodeStatus status{DecodeStatus::kNeedMoreBytes};
  std::optional<Frame> frame;
  /// Bytes used by the decoded frame (kOk only).
  std::size_t consumed{0};
  /// Total bytes needed for the next frame (kNeedMoreBytes only); equals the
  /// header size until the header itself is readable.
  std::size_t needed{0};

  bool ok() const {return status == DecodeStatus::kOk;}
};

DecodeResult decode_frame(ByteView bytes);

/// Accumulates stream bytes and yields complete frames in order.
class FrameBuffer
{
public:
  void append(ByteView data);
  /// Next complete frame. A non-kOk, non-kNeedMoreBytes result means the
  /// stream is corrupt and should be dropped.
  DecodeResult next();
  std::size_t buffered() const {return buf_.size() - start_;}

private:
  Bytes buf_;
  std::size_t start_{0};
};

}  // namespace fog::wire

#endif  // FOG__WIRE__CODEC_HPP_
