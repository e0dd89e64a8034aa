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

// Simulated PLC: memory image, math blocks and linear control loops.

#pragma once

#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plcmimic/config.hpp"
#include "plcmimic/hex.hpp"

namespace plcmimic {

struct PlantState {
  std::vector<std::uint8_t> coils;     // 0/1 per digital point
  std::vector<std::uint16_t> holding;  // analog points
  std::vector<std::vector<double>> loop_x;
};

PlantState initial_state(const ProtocolConfig& cfg);

double eval_block(BlockKind kind, double x);

/// Real value to register counts, rounded and saturated to [lo, hi].
std::uint16_t to_counts(const FixedPoint& fp, double real, std::uint16_t lo, std::uint16_t hi);

/// Recomputes every block from its current input register.
void recompute_blocks(PlantState& state, const ProtocolConfig& cfg);

/// One x <- Ax + Bu step of loop `index`, outputs written back.
void step_loop(PlantState& state, const ProtocolConfig& cfg, std::size_t index);

/// Answers one request frame (S7 handshake frames included) and applies its
/// side effects. Throws Error(kUndecodableRequest) when the frame cannot be
/// interpreted.
Bytes handle_request(PlantState& state, const ProtocolConfig& cfg, std::span<const std::uint8_t> request);

/// Thread-safe owner of one plant state.
class Plant {
 public:
  explicit Plant(ProtocolConfig cfg);

  Bytes handle(std::span<const std::uint8_t> request);
  std::string handle_hex(std::string_view request_hex);
  /// Steps every tick-triggered loop once.
  void tick();
  PlantState snapshot() const;
  const ProtocolConfig& config() const noexcept { return cfg_; }
  bool has_tick_loops() const noexcept;

 private:
  ProtocolConfig cfg_;
  mutable std::mutex mu_;
  PlantState state_;
};

}  // namespace plcmimic
