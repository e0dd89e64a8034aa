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

// Line protocol spoken with an external model service:
//
//   <decimal payload length> <payload>\n
//
// One request line is answered by exactly one response line. An empty
// payload is "0 \n".

#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "plcmimic/net.hpp"

namespace plcmimic::wire {

std::string encode_line(std::string_view payload);

/// Extracts one complete line from the front of `buffer`. Returns nullopt
/// while the line is incomplete; throws Error(kBadRequest) on bad framing.
std::optional<std::string> take_line(std::string& buffer);

/// Persistent client connection to a model service.
class ModelClient {
 public:
  explicit ModelClient(net::Endpoint endpoint) : endpoint_(std::move(endpoint)) {}

  /// Throws Error(kResponderTimeout) when no reply arrives within `timeout`
  /// (the connection is then dropped so a late reply cannot be misread),
  /// Error(kConnectionLost) on transport failure.
  std::string query(std::string_view payload, std::chrono::milliseconds timeout);

 private:
  net::Endpoint endpoint_;
  net::Socket sock_;
  std::string buffer_;
};

/// Model-side server: answers each payload with handler(payload). Used by
/// tests and as a stand-in backend.
class Server {
 public:
  using Handler = std::function<std::string(const std::string& payload)>;

  Server(const std::string& host, std::uint16_t port, Handler handler);
  std::uint16_t port() const noexcept { return server_.port(); }
  void start() { server_.start(); }
  void stop() { server_.stop(); }

 private:
  Handler handler_;
  net::TcpServer server_;
};

}  // namespace plcmimic::wire
