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

// Append-only JSONL event log with a single writer thread.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

namespace plcmimic {

/// "2026-01-02T03:04:05.123456Z"
std::string iso_timestamp(std::chrono::system_clock::time_point t);
std::optional<std::chrono::system_clock::time_point> parse_iso_timestamp(const std::string& text);

/// Records are queued by any thread and appended by one writer. If the file
/// cannot be opened or written, records go to stderr instead.
class JsonlSink {
 public:
  explicit JsonlSink(const std::string& path);
  ~JsonlSink();
  JsonlSink(const JsonlSink&) = delete;
  JsonlSink& operator=(const JsonlSink&) = delete;

  void write(nlohmann::json record);
  /// Blocks until every queued record has been written.
  void flush();
  bool degraded() const;

 private:
  void run();

  std::FILE* file_ = nullptr;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable drained_;
  std::deque<std::string> queue_;
  bool stopping_ = false;
  bool busy_ = false;
  bool degraded_ = false;
  std::thread writer_;
};

}  // namespace plcmimic
