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

#include "fog/common/ids.hpp"

#include <sodium.h>

#include <cstdio>

namespace fog
{

namespace
{

int hex_value(char c)
{
  if (c >= '0' && c <= '9') {return c - '0';}
  if (c >= 'a' && c <= 'f') {return c - 'a' + 10;}
  if (c >= 'A' && c <= 'F') {return c - 'A' + 10;}
  return -1;
}

void ensure_sodium()
{
  static const int rc = sodium_init();
  (void)rc;
}

}  // namespace

NodeId NodeId::random()
{
  ensure_sodium();
  NodeId id;
  randombytes_buf(id.bytes.data(), id.bytes.size());
  return id;
}

std::optional<NodeId> NodeId::from_hex(std::string_view hex)
{
  auto raw = from_hex_bytes(hex);
  if (!raw || raw->size() != 16) {
    return std::nullopt;
  }
  NodeId id;
  std::copy(raw->begin(), raw->end(), id.bytes.begin());
  return id;
}

std::string NodeId::hex() const
{
  return to_hex(bytes.data(), bytes.size());
}

bool NodeId::is_zero() const
{
  for (auto b : bytes) {
    if (b != 0) {return false;}
  }
  return true;
}

std::string to_hex(const std::uint8_t * data, std::size_t size)
{
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(size * 2);
  for (std::size_t i = 0; i < size; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0x0f]);
  }
  return out;
}

std::optional<std::string> from_hex_bytes(std::string_view hex)
{
  if (hex.size() % 2 != 0) {
    return std::nullopt;
  }
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_value(hex[i]);
    int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) {
      return std::nullopt;
    }
    out.push_back(static_cast<char>((hi << 4) | lo));
  }
  return out;
}

std::string random_hex(std::size_t chars)
{
  ensure_sodium();
  std::string raw((chars + 1) / 2, '\0');
  randombytes_buf(raw.data(), raw.size());
  auto hex = to_hex(reinterpret_cast<const std::uint8_t *>(raw.data()), raw.size());
  hex.resize(chars);
  return hex;
}

}  // namespace fog
