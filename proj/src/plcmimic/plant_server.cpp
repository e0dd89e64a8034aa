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

#include "plcmimic/plant_server.hpp"

#include "plcmimic/error.hpp"

namespace plcmimic {

PlantServer::PlantServer(std::shared_ptr<Plant> plant, const std::string& host, std::uint16_t port,
                         const std::string& capture_log)
    : plant_(std::move(plant)),
      sink_(capture_log.empty() ? nullptr : std::make_unique<JsonlSink>(capture_log)),
      server_(host, port, [this](net::Socket& s, const std::string& peer) { serve(s, peer); }) {}

PlantServer::~PlantServer() { stop(); }

void PlantServer::start() {
  server_.start();
  if (!plant_->has_tick_loops() || ticking_.exchange(true)) return;
  std::uint32_t period = 0;
  for (const auto& l : plant_->config().loops)
    if (l.trigger == LoopTrigger::kTick) period = period == 0 ? l.tick_ms : std::min(period, l.tick_ms);
  ticker_ = std::thread([this, period] {
    std::unique_lock lock(tick_mu_);
    while (ticking_) {
      if (tick_cv_.wait_for(lock, std::chrono::milliseconds(std::max<std::uint32_t>(period, 1)),
                            [this] { return !ticking_; }))
        break;
      plant_->tick();
    }
  });
}

void PlantServer::stop() {
  server_.stop();
  if (ticking_.exchange(false)) {
    tick_cv_.notify_all();
    ticker_.join();
  }
  flush_log();
}

void PlantServer::flush_log() {
  if (sink_) sink_->flush();
}

void PlantServer::log(const std::string& peer, const char* dir, const Bytes& bytes) {
  if (!sink_) return;
  sink_->write({{"ts", iso_timestamp(std::chrono::system_clock::now())},
                {"peer", peer},
                {"dir", dir},
                {"hex", to_hex(bytes)}});
}

void PlantServer::serve(net::Socket& sock, const std::string& peer) {
  net::FrameReader reader(sock, plant_->config().protocol);
  Bytes frame;
  for (;;) {
    const auto status = reader.next(frame, std::chrono::milliseconds(-1));
    if (status != net::FrameReader::Status::kFrame) {
      if (!frame.empty()) log(peer, "drop", frame);
      return;
    }
    log(peer, "in", frame);
    Bytes reply;
    try {
      reply = plant_->handle(frame);
    } catch (const Error&) {
      log(peer, "drop", frame);
      return;
    }
    log(peer, "out", reply);
    sock.send_all(reply);
  }
}

}  // namespace plcmimic
