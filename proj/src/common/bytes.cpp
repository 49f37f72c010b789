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

#include "fog/common/bytes.hpp"

namespace fog
{

void put_u32_be(std::uint8_t * p, std::uint32_t v)
{
  p[0] = static_cast<std::uint8_t>(v >> 24);
  p[1] = static_cast<std::uint8_t>(v >> 16);
  p[2] = static_cast<std::uint8_t>(v >> 8);
  p[3] = static_cast<std::uint8_t>(v);
}

void put_u64_be(std::uint8_t * p, std::uint64_t v)
{
  put_u32_be(p, static_cast<std::uint32_t>(v >> 32));
  put_u32_be(p + 4, static_cast<std::uint32_t>(v));
}

std::uint32_t get_u32_be(const std::uint8_t * p)
{
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

std::uint64_t get_u64_be(const std::uint8_t * p)
{
  return (static_cast<std::uint64_t>(get_u32_be(p)) << 32) | get_u32_be(p + 4);
}

void ByteWriter::u16(std::uint16_t v)
{
  buf().push_back(static_cast<std::uint8_t>(v >> 8));
  buf().push_back(static_cast<std::uint8_t>(v));
}

void ByteWriter::u32(std::uint32_t v)
{
  std::uint8_t tmp[4];
  put_u32_be(tmp, v);
  buf().insert(buf().end(), tmp, tmp + 4);
}

void ByteWriter::u64(std::uint64_t v)
{
  std::uint8_t tmp[8];
  put_u64_be(tmp, v);
  buf().insert(buf().end(), tmp, tmp + 8);
}

void ByteWriter::raw(ByteView data)
{
  buf().insert(buf().end(), data.begin(), data.end());
}

void ByteWriter::raw(std::string_view data)
{
  buf().insert(buf().end(), data.begin(), data.end());
}

void ByteWriter::str8(std::string_view s)
{
  u8(static_cast<std::uint8_t>(s.size()));
  raw(s);
}

void ByteWriter::str16(std::string_view s)
{
  u16(static_cast<std::uint16_t>(s.size()));
  raw(s);
}

bool ByteReader::u8(std::uint8_t & v)
{
  if (remaining() < 1) {return false;}
  v = data_[pos_++];
  return true;
}

bool ByteReader::u16(std::uint16_t & v)
{
  if (remaining() < 2) {return false;}
  v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
  pos_ += 2;
  return true;
}

bool ByteReader::u32(std::uint32_t & v)
{
  if (remaining() < 4) {return false;}
  v = get_u32_be(data_.data() + pos_);
  pos_ += 4;
  return true;
}

bool ByteReader::u64(std::uint64_t & v)
{
  if (remaining() < 8) {return false;}
  v = get_u64_be(data_.data() + pos_);
  pos_ += 8;
  return true;
}

bool ByteReader::raw(std::size_t n, Bytes & out)
{
  if (remaining() < n) {return false;}
  out.assign(data_.begin() + pos_, data_.begin() + pos_ + n);
  pos_ += n;
  return true;
}

bool ByteReader::str8(std::string & s)
{
  std::uint8_t n = 0;
  if (!u8(n) || remaining() < n) {return false;}
  s.assign(reinterpret_cast<const char *>(data_.data() + pos_), n);
  pos_ += n;
  return true;
}

bool ByteReader::str16(std::string & s)
{
  std::uint16_t n = 0;
  if (!u16(n) || remaining() < n) {return false;}
  s.assign(reinterpret_cast<const char *>(data_.data() + pos_), n);
  pos_ += n;
  return true;
}

}  // namespace fog
