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

#ifndef FOG__COMMON__BYTES_HPP_
#define FOG__COMMON__BYTES_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fog
{

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Appends big-endian integers and length-prefixed strings to a buffer.
class ByteWriter
{
public:
  ByteWriter() = default;
  explicit ByteWriter(Bytes & out)
  : out_(&out) {}

  void u8(std::uint8_t v) {buf().push_back(v);}
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void raw(ByteView data);
  void raw(std::string_view data);
  /// 1-byte length prefix; callers guarantee size <= 255.
  void str8(std::string_view s);
  /// 2-byte length prefix; callers guarantee size <= 65535.
  void str16(std::string_view s);

  Bytes take() {return std::move(own_);}
  const Bytes & bytes() const {return out_ ? *out_ : own_;}

private:
  Bytes & buf() {return out_ ? *out_ : own_;}

  Bytes own_;
  Bytes * out_{nullptr};
};

/// Bounds-checked reader over a byte span. Every accessor returns false
/// (and leaves the output untouched) once the input is exhausted.
class ByteReader
{
public:
  explicit ByteReader(ByteView data)
  : data_(data) {}

  bool u8(std::uint8_t & v);
  bool u16(std::uint16_t & v);
  bool u32(std::uint32_t & v);
  bool u64(std::uint64_t & v);
  bool raw(std::size_t n, Bytes & out);
  bool str8(std::string & s);
  bool str16(std::string & s);
  ByteView rest() const {return data_.subspan(pos_);}
  std::size_t remaining() const {return data_.size() - pos_;}
  bool done() const {return pos_ == data_.size();}

private:
  ByteView data_;
  std::size_t pos_{0};
};

void put_u32_be(std::uint8_t * p, std::uint32_t v);
void put_u64_be(std::uint8_t * p, std::uint64_t v);
std::uint32_t get_u32_be(const std::uint8_t * p);
std::uint64_t get_u64_be(const std::uint8_t * p);

}  // namespace fog

#endif  // FOG__COMMON__BYTES_HPP_
