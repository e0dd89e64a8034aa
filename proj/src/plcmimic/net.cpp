// Copyright 2026 The plcmimic Authors
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

#include "plcmimic/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "plcmimic/error.hpp"
#include "plcmimic/protocol.hpp"

namespace plcmimic::net {

namespace {

std::string errno_text() { return std::strerror(errno); }

constexpr std::size_t kMinFrame = 7;
constexpr std::size_t kMaxFrame = 4096;

}  // namespace

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size())
    throw Error(Errc::kInvalidConfig, "target", "expected host:port, got '" + std::string(text) + "'");
  Endpoint ep;
  ep.host = std::string(text.substr(0, colon));
  if (ep.host.size() > 2 && ep.host.front() == '[' && ep.host.back() == ']') ep.host = ep.host.substr(1, ep.host.size() - 2);
  try {
    const long port = std::stol(std::string(text.substr(colon + 1)));
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    ep.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw Error(Errc::kInvalidConfig, "target", "bad port in '" + std::string(text) + "'");
  }
  return ep;
}

Socket::~Socket() { close(); }

Socket::Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void Socket::close() noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Socket::shutdown() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::send_all(std::span<const std::uint8_t> data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::kConnectionLost, "send", errno_text());
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::optional<std::size_t> Socket::recv_some(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  for (;;) {
    const int r = ::poll(&p, 1, timeout.count() < 0 ? -1 : static_cast<int>(timeout.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) throw Error(Errc::kConnectionLost, "poll", errno_text());
    if (r == 0) return std::nullopt;
    break;
  }
  for (;;) {
    const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) {
      if (errno == ECONNRESET || errno == EBADF || errno == ENOTCONN) return 0;
      throw Error(Errc::kConnectionLost, "recv", errno_text());
    }
    return static_cast<std::size_t>(n);
  }
}

Socket connect_tcp(const Endpoint& ep, std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  if (::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr)
    throw Error(Errc::kConnectionLost, "target", "cannot resolve " + ep.str());
  std::string last = "no address";
  bool timed_out = false;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) continue;
    const int flags = ::fcntl(s.fd(), F_GETFL, 0);
    ::fcntl(s.fd(), F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(s.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      pollfd p{s.fd(), POLLOUT, 0};
      rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
      if (rc == 0) {
        timed_out = true;
        last = "connect timed out";
        continue;
      }
      int err = 0;
      socklen_t len = sizeof(err);
      ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      if (err != 0) last = std::strerror(err);
    } else if (rc < 0) {
      last = errno_text();
    }
    if (rc == 0) {
      ::fcntl(s.fd(), F_SETFL, flags);
      int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      ::freeaddrinfo(res);
      return s;
    }
  }
  ::freeaddrinfo(res);
  if (timed_out) throw Error(Errc::kProbeTimeout, "connect", ep.str() + ": " + last);
  throw Error(Errc::kConnectionLost, "connect", ep.str() + ": " + last);
}

FrameReader::Status FrameReader::next(Bytes& frame, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::uint8_t chunk[4096];
  for (;;) {
    if (const auto size = frame_size(protocol_, buf_)) {
      if (*size < kMinFrame || *size > kMaxFrame) {
        frame = buf_;
        buf_.clear();
        return Status::kMalformed;
      }
      if (buf_.size() >= *size) {
        frame.assign(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(*size));
        buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(*size));
        return Status::kFrame;
      }
    }
    auto wait = std::chrono::milliseconds(-1);
    if (timeout.count() >= 0) {
      wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (wait.count() < 0) return Status::kTimeout;
    }
    const auto n = sock_.recv_some(chunk, wait);
    if (!n) return Status::kTimeout;
    if (*n == 0) {
      frame = buf_;
      buf_.clear();
      return Status::kClosed;
    }
    buf_.insert(buf_.end(), chunk, chunk + *n);
  }
}

namespace {

Endpoint endpoint_of(const sockaddr_storage& ss) {
  char host[INET6_ADDRSTRLEN] = {};
  if (ss.ss_family == AF_INET) {
    const auto* in = reinterpret_cast<const sockaddr_in*>(&ss);
    ::inet_ntop(AF_INET, &in->sin_addr, host, sizeof(host));
    return {host, ntohs(in->sin_port)};
  }
  const auto* in6 = reinterpret_cast<const sockaddr_in6*>(&ss);
  ::inet_ntop(AF_INET6, &in6->sin6_addr, host, sizeof(host));
  return {host, ntohs(in6->sin6_port)};
}

}  // namespace

Endpoint local_endpoint(int fd) {
  sockaddr_storage ss{};
  socklen_t len = sizeof(ss);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&ss), &len) != 0) return {"unknown", 0};
  return endpoint_of(ss);
}

Endpoint remote_endpoint(int fd) {
  sockaddr_storage ss{};
  socklen_t len = sizeof(ss);
  if (::getpeername(fd, reinterpret_cast<sockaddr*>(&ss), &len) != 0) return {"unknown", 0};
  return endpoint_of(ss);
}

std::string peer_name(int fd) {
  const Endpoint ep = remote_endpoint(fd);
  if (ep.host.find(':') != std::string::npos) return "[" + ep.host + "]:" + std::to_string(ep.port);
  return ep.str();
}

TcpServer::TcpServer(const std::string& host, std::uint16_t port, Handler handler) : handler_(std::move(handler)) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string p = std::to_string(port);
  if (::getaddrinfo(host.empty() ? nullptr : host.c_str(), p.c_str(), &hints, &res) != 0 || res == nullptr)
    throw Error(Errc::kBindError, "host", "cannot resolve '" + host + "'");
  std::string last = "no address";
  for (addrinfo* ai = res; ai != nullptr && !listener_.valid(); ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) continue;
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) != 0 || ::listen(s.fd(), 64) != 0) {
      last = errno_text();
      continue;
    }
    listener_ = std::move(s);
  }
  ::freeaddrinfo(res);
  if (!listener_.valid()) throw Error(Errc::kBindError, "port", host + ":" + p + ": " + last);
  sockaddr_storage ss{};
  socklen_t len = sizeof(ss);
  ::getsockname(listener_.fd(), reinterpret_cast<sockaddr*>(&ss), &len);
  port_ = ss.ss_family == AF_INET ? ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port)
                                  : ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port);
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
  if (running_.exchange(true)) return;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpServer::accept_loop() {
  while (running_) {
    pollfd p{listener_.fd(), POLLIN, 0};
    const int r = ::poll(&p, 1, 100);
    if (r <= 0) continue;
    const int fd = ::accept(listener_.fd(), nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(mu_);
    for (auto it = conns_.begin(); it != conns_.end();) {
      if (it->done) {
        it->worker.join();
        it = conns_.erase(it);
      } else {
        ++it;
      }
    }
    if (!running_) {
      ::close(fd);
      break;
    }
    auto& conn = conns_.emplace_back();
    conn.sock = Socket(fd);
    conn.worker = std::thread([this, &conn] {
      try {
        handler_(conn.sock, peer_name(conn.sock.fd()));
      } catch (...) {
      }
      conn.sock.shutdown();
      conn.done = true;
    });
  }
}

void TcpServer::stop() {
  if (!running_.exchange(false)) return;
  if (acceptor_.joinable()) acceptor_.join();
  std::list<Conn> conns;
  {
    std::lock_guard lock(mu_);
    for (auto& c : conns_) c.sock.shutdown();
    conns.splice(conns.end(), conns_);
  }
  for (auto& c : conns)
    if (c.worker.joinable()) c.worker.join();
  listener_.close();
}

}  // namespace plcmimic::net
