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

#ifndef FOG__NET__SOCKET_HPP_
#define FOG__NET__SOCKET_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "fog/common/bytes.hpp"
#include "fog/wire/codec.hpp"

namespace fog::net
{

struct Address
{
  std::string host;
  std::uint16_t port{0};

  std::string str() const {return host + ":" + std::to_string(port);}
  bool operator==(const Address &) const = default;
};

/// Parses "host:port"; returns nullopt for anything else.
std::optional<Address> parse_address(std::string_view text);

/// Move-only owner of a stream socket descriptor.
class Socket
{
public:
  Socket() = default;
  explicit Socket(int fd)
  : fd_(fd) {}
  ~Socket();
  Socket(Socket && other) noexcept;
  Socket & operator=(Socket && other) noexcept;
  Socket(const Socket &) = delete;
  Socket & operator=(const Socket &) = delete;

  bool valid() const {return fd_ >= 0;}
  int fd() const {return fd_;}

  /// Writes everything or throws Error(kIo).
  void send_all(ByteView data);
  /// Returns bytes read, 0 on orderly close; throws Error(kIo) on failure.
  std::size_t recv_some(std::uint8_t * buf, std::size_t size);
  /// Waits until readable; false on timeout.
  bool wait_readable(std::chrono::milliseconds timeout) const;
  /// Wakes any thread blocked in recv on this socket.
  void shutdown();
  void close();

  std::string peer_host() const;

private:
  int fd_{-1};
};

Socket connect_tcp(const Address & addr, std::chrono::milliseconds timeout);

/// Listening stream socket with optional peer allowlist enforcement.
///
/// When `FOG_PEER_ALLOWLIST` (comma-separated IPs) is set in the environment,
/// connections from other peers are accepted and immediately closed.
class Listener
{
public:
  Listener() = default;
  /// Binds host:port (port 0 picks an ephemeral port). Throws Error(kIo).
  Listener(const std::string & host, std::uint16_t port);

  /// Binds the first free port in [first, last]. Throws Error(kIo) if none is free.
  static Listener bind_in_range(const std::string & host, std::uint16_t first, std::uint16_t last);
  /// Binds according to `FOG_LISTEN_PORTS` ("first-last") when set, else an ephemeral port.
  static Listener bind_from_env(const std::string & host);

  std::optional<Socket> accept(std::chrono::milliseconds timeout);
  std::uint16_t port() const {return port_;}
  Address address() const {return {host_, port_};}
  int fd() const {return sock_.fd();}
  bool valid() const {return sock_.valid();}
  void close() {sock_.close();}

private:
  Socket sock_;
  std::string host_;
  std::uint16_t port_{0};
  std::set<std::string> allowlist_;
};

/// Frame-level view of a connected socket. Writes are serialized; reads must
/// come from a single thread.
class FrameConnection
{
public:
  FrameConnection() = default;
  explicit FrameConnection(Socket sock)
  : sock_(std::move(sock)) {}

  /// Next frame, or nullopt on timeout. Throws Error(kIo) on close or corrupt stream.
  std::optional<wire::Frame> read(std::optional<std::chrono::milliseconds> timeout = std::nullopt);
  void write(ByteView encoded);
  void write(const wire::Frame & frame) {write(ByteView(wire::encode_frame(frame)));}
  void write_control(wire::FrameKind kind, ByteView body)
  {
    write(ByteView(wire::encode_control(kind, body)));
  }
  void shutdown() {sock_.shutdown();}
  bool valid() const {return sock_.valid();}
  Socket & socket() {return sock_;}

private:
  Socket sock_;
  wire::FrameBuffer buf_;
  std::mutex write_mu_;
};

/// Local ports with a TCP socket in LISTEN state, read from /proc/net/tcp{,6}.
std::set<std::uint16_t> listening_ports();

}  // namespace fog::net

#endif  // FOG__NET__SOCKET_HPP_
