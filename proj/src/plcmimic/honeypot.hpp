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

// Honeypot front-end: speaks the device protocol on the network and asks a
// responder for every answer.

#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <json.hpp>

#include "plcmimic/config.hpp"
#include "plcmimic/logsink.hpp"
#include "plcmimic/net.hpp"
#include "plcmimic/responder.hpp"

namespace plcmimic {

enum class FallbackPolicy { kDrop, kException };

struct HoneypotOptions {
  std::string host = "0.0.0.0";
  std::uint16_t port = 0;  // 0: protocol default from the config
  std::chrono::milliseconds deadline{500};
  FallbackPolicy fallback = FallbackPolicy::kException;
  std::string log_dir;  // empty disables logging
};

/// Device-failure exception for `request`, or nullopt when the request
/// cannot be parsed well enough to answer.
std::optional<Bytes> fallback_response(Protocol protocol, std::span<const std::uint8_t> request);

class Honeypot {
 public:
  /// Binds immediately. Port 0 in options means the protocol default; use
  /// `ephemeral` to bind an OS-chosen port instead (tests).
  Honeypot(ProtocolConfig cfg, std::shared_ptr<Responder> responder, HoneypotOptions options, bool ephemeral = false);
  ~Honeypot();

  std::uint16_t port() const noexcept { return server_->port(); }
  void start() { server_->start(); }
  void stop();
  void flush_log();

 private:
  void serve(net::Socket& sock, const std::string& peer);
  void log(nlohmann::json record);

  ProtocolConfig cfg_;
  std::shared_ptr<Responder> responder_;
  HoneypotOptions options_;
  std::unique_ptr<JsonlSink> sink_;
  std::atomic<std::uint64_t> seq_{0};
  std::unique_ptr<net::TcpServer> server_;
};

struct LatencySummary {
  std::size_t count = 0;
  double p50 = 0, p90 = 0, p99 = 0, max = 0;
};

/// Linear-interpolation percentile (q in [0, 100]) of unsorted samples.
double percentile(std::vector<double> samples, double q);

/// Per-source-IP activity and latency percentiles of an interaction log
/// (file, or directory holding interactions.jsonl).
nlohmann::json summarize_logs(const std::string& path);

}  // namespace plcmimic
