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

// Serves a Plant over TCP and records every frame in a JSONL capture log.

#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <string>
#include <thread>

#include "plcmimic/logsink.hpp"
#include "plcmimic/net.hpp"
#include "plcmimic/plant.hpp"

namespace plcmimic {

class PlantServer {
 public:
  /// `capture_log` empty disables logging. Throws Error(kBindError).
  PlantServer(std::shared_ptr<Plant> plant, const std::string& host, std::uint16_t port,
              const std::string& capture_log = {});
  ~PlantServer();

  std::uint16_t port() const noexcept { return server_.port(); }
  void start();
  void stop();
  /// Waits until queued capture records are on disk.
  void flush_log();

 private:
  void serve(net::Socket& sock, const std::string& peer);
  void log(const std::string& peer, const char* dir, const Bytes& bytes);

  std::shared_ptr<Plant> plant_;
  std::unique_ptr<JsonlSink> sink_;
  net::TcpServer server_;
  std::atomic<bool> ticking_{false};
  std::mutex tick_mu_;
  std::condition_variable tick_cv_;
  std::thread ticker_;
};

}  // namespace plcmimic
