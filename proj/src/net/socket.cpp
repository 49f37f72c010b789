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

#include "fog/net/socket.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fog/common/error.hpp"

namespace fog::net
{

namespace
{

[[noreturn]] void throw_errno(const std::string & what)
{
  throw Error(ErrorCode::kIo, what + ": " + std::strerror(errno));
}

sockaddr_in make_sockaddr(const std::string & host, std::uint16_t port)
{
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  std::string h = host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, h.c_str(), &sa.sin_addr) != 1) {
    throw Error(ErrorCode::kIo, "unsupported address '" + host + "'");
  }
  return sa;
}

std::set<std::string> allowlist_from_env()
{
  std::set<std::string> out;
  const char * env = std::getenv("FOG_PEER_ALLOWLIST");
  if (!env) {
    return out;
  }
  std::stringstream ss(env);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) {
      out.insert(item.substr(b, e - b + 1));
    }
  }
  return out;
}

}  // namespace

std::optional<Address> parse_address(std::string_view text)
{
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 >= text.size()) {
    return std::nullopt;
  }
  unsigned long port = 0;
  for (char c : text.substr(colon + 1)) {
    if (c < '0' || c > '9') {
      return std::nullopt;
    }
    port = port * 10 + static_cast<unsigned long>(c - '0');
    if (port > 65535) {
      return std::nullopt;
    }
  }
  return Address{std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

Socket::~Socket()
{
  close();
}

Socket::Socket(Socket && other) noexcept
: fd_(other.fd_)
{
  other.fd_ = -1;
}

Socket & Socket::operator=(Socket && other) noexcept
{
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void Socket::send_all(ByteView data)
{
  std::size_t sent = 0;
  while (sent < data.size()) {
    ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw_errno("send");
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::size_t Socket::recv_some(std::uint8_t * buf, std::size_t size)
{
  for (;;) {
    ssize_t n = ::recv(fd_, buf, size, 0);
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw_errno("recv");
    }
    return static_cast<std::size_t>(n);
  }
}

bool Socket::wait_readable(std::chrono::milliseconds timeout) const
{
  pollfd pfd{fd_, POLLIN, 0};
  int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  return rc > 0;
}

void Socket::shutdown()
{
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
  }
}

void Socket::close()
{
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::string Socket::peer_host() const
{
  sockaddr_in sa{};
  socklen_t len = sizeof(sa);
  if (::getpeername(fd_, reinterpret_cast<sockaddr *>(&sa), &len) != 0) {
    return {};
  }
  char buf[INET_ADDRSTRLEN] = {};
  ::inet_ntop(AF_INET, &sa.sin_addr, buf, sizeof(buf));
  return buf;
}

Socket connect_tcp(const Address & addr, std::chrono::milliseconds timeout)
{
  auto sa = make_sockaddr(addr.host, addr.port);
  Socket sock(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!sock.valid()) {
    throw_errno("socket");
  }
  int flags = ::fcntl(sock.fd(), F_GETFL, 0);
  ::fcntl(sock.fd(), F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(sock.fd(), reinterpret_cast<sockaddr *>(&sa), sizeof(sa));
  if (rc != 0 && errno != EINPROGRESS) {
    throw_errno("connect " + addr.str());
  }
  if (rc != 0) {
    pollfd pfd{sock.fd(), POLLOUT, 0};
    rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (rc <= 0) {
      throw Error(ErrorCode::kIo, "connect " + addr.str() + ": timed out");
    }
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(sock.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      errno = err;
      throw_errno("connect " + addr.str());
    }
  }
  ::fcntl(sock.fd(), F_SETFL, flags);
  int one = 1;
  ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return sock;
}

Listener::Listener(const std::string & host, std::uint16_t port)
: host_(host == "localhost" ? "127.0.0.1" : host), allowlist_(allowlist_from_env())
{
  auto sa = make_sockaddr(host_, port);
  Socket sock(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!sock.valid()) {
    throw_errno("socket");
  }
  int one = 1;
  ::setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(sock.fd(), reinterpret_cast<sockaddr *>(&sa), sizeof(sa)) != 0) {
    throw_errno("bind " + host_ + ":" + std::to_string(port));
  }
  if (::listen(sock.fd(), 128) != 0) {
    throw_errno("listen");
  }
  socklen_t len = sizeof(sa);
  ::getsockname(sock.fd(), reinterpret_cast<sockaddr *>(&sa), &len);
  port_ = ntohs(sa.sin_port);
  sock_ = std::move(sock);
}

Listener Listener::bind_in_range(const std::string & host, std::uint16_t first, std::uint16_t last)
{
  for (std::uint32_t p = first; p <= last; ++p) {
    try {
      return Listener(host, static_cast<std::uint16_t>(p));
    } catch (const Error &) {
    }
  }
  throw Error(ErrorCode::kIo, "no free port in " + std::to_string(first) + "-" +
          std::to_string(last));
}

Listener Listener::bind_from_env(const std::string & host)
{
  const char * env = std::getenv("FOG_LISTEN_PORTS");
  if (env) {
    std::string range(env);
    auto dash = range.find('-');
    if (dash != std::string::npos) {
      auto first = static_cast<std::uint16_t>(std::stoul(range.substr(0, dash)));
      auto last = static_cast<std::uint16_t>(std::stoul(range.substr(dash + 1)));
      return bind_in_range(host, first, last);
    }
  }
  return Listener(host, 0);
}

std::optional<Socket> Listener::accept(std::chrono::milliseconds timeout)
{
  if (!sock_.valid() || !sock_.wait_readable(timeout)) {
    return std::nullopt;
  }
  int fd = ::accept4(sock_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) {
    return std::nullopt;
  }
  Socket sock(fd);
  if (!allowlist_.empty() && !allowlist_.count(sock.peer_host())) {
    return std::nullopt;
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return sock;
}

std::optional<wire::Frame> FrameConnection::read(std::optional<std::chrono::milliseconds> timeout)
{
  std::uint8_t chunk[64 * 1024];
  for (;;) {
    auto result = buf_.next();
    if (result.ok()) {
      return std::move(result.frame);
    }
    if (result.status != wire::DecodeStatus::kNeedMoreBytes) {
      throw Error(ErrorCode::kIo, "corrupt stream: " + std::string(wire::to_string(result.status)));
    }
    if (timeout && !sock_.wait_readable(*timeout)) {
      return std::nullopt;
    }
    std::size_t n = sock_.recv_some(chunk, sizeof(chunk));
    if (n == 0) {
      throw Error(ErrorCode::kIo, "connection closed");
    }
    buf_.append(ByteView(chunk, n));
  }
}

void FrameConnection::write(ByteView encoded)
{
  std::lock_guard<std::mutex> lock(write_mu_);
  sock_.send_all(encoded);
}

std::set<std::uint16_t> listening_ports()
{
  std::set<std::uint16_t> ports;
  for (const char * path : {"/proc/net/tcp", "/proc/net/tcp6"}) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string slot, local, remote, state;
      ls >> slot >> local >> remote >> state;
      if (state != "0A") {
        continue;
      }
      auto colon = local.rfind(':');
      if (colon == std::string::npos) {
        continue;
      }
      ports.insert(static_cast<std::uint16_t>(std::stoul(local.substr(colon + 1), nullptr, 16)));
    }
  }
  return ports;
}

}  // namespace fog::net
