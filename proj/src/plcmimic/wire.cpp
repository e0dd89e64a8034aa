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

#include "plcmimic/wire.hpp"

#include <cctype>

#include "plcmimic/error.hpp"

namespace plcmimic::wire {

namespace {

constexpr std::size_t kMaxPayload = 1 << 20;

}  // namespace

std::string encode_line(std::string_view payload) {
  return std::to_string(payload.size()) + " " + std::string(payload) + "\n";
}

std::optional<std::string> take_line(std::string& buffer) {
  const auto space = buffer.find(' ');
  if (space == std::string::npos) {
    if (buffer.size() > 8) throw Error(Errc::kBadRequest, "length", "missing length prefix");
    for (char c : buffer)
      if (!std::isdigit(static_cast<unsigned char>(c))) throw Error(Errc::kBadRequest, "length", "non-digit prefix");
    return std::nullopt;
  }
  if (space == 0 || space > 8) throw Error(Errc::kBadRequest, "length", "bad length prefix");
  std::size_t len = 0;
  for (std::size_t i = 0; i < space; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(buffer[i]))) throw Error(Errc::kBadRequest, "length", "non-digit prefix");
    len = len * 10 + static_cast<std::size_t>(buffer[i] - '0');
  }
  if (len > kMaxPayload) throw Error(Errc::kBadRequest, "length", "payload too large");
  if (buffer.size() < space + 1 + len + 1) return std::nullopt;
  if (buffer[space + 1 + len] != '\n') throw Error(Errc::kBadRequest, "payload", "length does not match line end");
  std::string payload = buffer.substr(space + 1, len);
  buffer.erase(0, space + 1 + len + 1);
  return payload;
}

std::string ModelClient::query(std::string_view payload, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  if (!sock_.valid()) {
    sock_ = net::connect_tcp(endpoint_, timeout);
    buffer_.clear();
  }
  const std::string line = encode_line(payload);
  try {
    sock_.send_all(std::span(reinterpret_cast<const std::uint8_t*>(line.data()), line.size()));
  } catch (const Error&) {
    sock_.close();
    throw;
  }
  std::uint8_t chunk[4096];
  for (;;) {
    try {
      if (auto reply = take_line(buffer_)) return *reply;
    } catch (const Error&) {
      sock_.close();
      throw;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    std::optional<std::size_t> n;
    if (left.count() > 0) n = sock_.recv_some(chunk, left);
    if (!n) {
      sock_.close();
      throw Error(Errc::kResponderTimeout, "model", endpoint_.str() + " did not answer in time");
    }
    if (*n == 0) {
      sock_.close();
      throw Error(Errc::kConnectionLost, "model", endpoint_.str() + " closed the connection");
    }
    buffer_.append(reinterpret_cast<const char*>(chunk), *n);
  }
}

Server::Server(const std::string& host, std::uint16_t port, Handler handler)
    : handler_(std::move(handler)),
      server_(host, port, [this](net::Socket& sock, const std::string&) {
        std::string buffer;
        std::uint8_t chunk[4096];
        for (;;) {
          std::optional<std::string> payload;
          try {
            payload = take_line(buffer);
          } catch (const Error&) {
            return;
          }
          if (payload) {
            const std::string reply = encode_line(handler_(*payload));
            sock.send_all(std::span(reinterpret_cast<const std::uint8_t*>(reply.data()), reply.size()));
            continue;
          }
          const auto n = sock.recv_some(chunk, std::chrono::milliseconds(-1));
          if (!n || *n == 0) return;
          buffer.append(reinterpret_cast<const char*>(chunk), *n);
        }
      }) {}

}  // namespace plcmimic::wire
