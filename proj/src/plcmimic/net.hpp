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

// Blocking TCP plumbing over POSIX sockets.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>

#include "plcmimic/config.hpp"
#include "plcmimic/hex.hpp"

namespace plcmimic::net {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  std::string str() const { return host + ":" + std::to_string(port); }
};

/// "host:port"; throws Error(kInvalidConfig) otherwise.
Endpoint parse_endpoint(std::string_view text);

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  bool valid() const noexcept { return fd_ >= 0; }
  int fd() const noexcept { return fd_; }
  void close() noexcept;
  void shutdown() noexcept;

  /// Throws Error(kConnectionLost).
  void send_all(std::span<const std::uint8_t> data);
  /// Waits up to `timeout` (negative: forever). Returns 0 bytes on orderly
  /// close, nullopt on timeout. Throws Error(kConnectionLost) on errors.
  std::optional<std::size_t> recv_some(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
};

/// Throws Error(kConnectionLost) or Error(kProbeTimeout).
Socket connect_tcp(const Endpoint& ep, std::chrono::milliseconds timeout);

/// Splits a byte stream into frames using the protocol length field.
class FrameReader {
 public:
  FrameReader(Socket& sock, Protocol protocol) : sock_(sock), protocol_(protocol) {}

  enum class Status { kFrame, kClosed, kTimeout, kMalformed };

  /// On kFrame, `frame` holds the next complete frame. kMalformed means the
  /// length field is impossible; the buffered bytes are left in `frame`.
  Status next(Bytes& frame, std::chrono::milliseconds timeout);

 private:
  Socket& sock_;
  Protocol protocol_;
  Bytes buf_;
};

/// Accept loop with one thread per connection.
class TcpServer {
 public:
  using Handler = std::function<void(Socket&, const std::string& peer)>;

  /// Binds immediately; port 0 picks an ephemeral port. Throws
  /// Error(kBindError).
  TcpServer(const std::string& host, std::uint16_t port, Handler handler);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  void start();
  /// Closes the listener and every open connection, then joins.
  void stop();

 private:
  void accept_loop();

  Socket listener_;
  std::uint16_t port_ = 0;
  Handler handler_;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mu_;
  struct Conn {
    Socket sock;
    std::thread worker;
    std::atomic<bool> done{false};
  };
  std::list<Conn> conns_;
};

std::string peer_name(int fd);
Endpoint local_endpoint(int fd);
Endpoint remote_endpoint(int fd);

}  // namespace plcmimic::net
