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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace plcmimic {

enum class Protocol { kModbus, kS7Comm };
enum class DataKind { kDigital, kAnalog };

std::string_view protocol_name(Protocol protocol);
std::uint16_t default_port(Protocol protocol);

/// Contiguous block of valid point addresses. Empty when count == 0.
struct AddressRange {
  std::uint32_t low = 0;
  std::uint32_t count = 0;

  std::uint32_t high() const { return low + count - 1; }
  bool contains(std::uint32_t address, std::uint32_t n = 1) const {
    return n >= 1 && count > 0 && address >= low &&
           static_cast<std::uint64_t>(address) + n <= static_cast<std::uint64_t>(low) + count;
  }
};

enum class BlockKind { kSgn, kExpo10, kCosh, kSigmoid, kCauchy };
std::string_view block_kind_name(BlockKind kind);
std::optional<BlockKind> parse_block_kind(std::string_view name);

/// Fixed-point convention shared by blocks and loops:
///   real = offset + counts * scale
struct FixedPoint {
  double scale = 1e-3;
  double offset = 0.0;

  double to_real(std::uint16_t counts) const { return offset + counts * scale; }
};

struct MathBlockConfig {
  BlockKind kind = BlockKind::kSigmoid;
  std::uint32_t in_addr = 0;
  std::uint32_t out_addr = 1;
  FixedPoint input;
  FixedPoint output;
  std::uint16_t clamp_low = 0;
  std::uint16_t clamp_high = 0xffff;
};

enum class LoopTrigger { kOnWrite, kTick };

/// Discrete-time linear plant x <- A x + B u, y = C x over holding registers.
struct ControlLoopConfig {
  std::string name;
  std::vector<std::vector<double>> a, b, c;
  std::vector<double> x0;
  std::vector<std::uint32_t> u_addrs;
  std::vector<std::uint32_t> y_addrs;
  FixedPoint input;
  FixedPoint output;
  std::uint16_t clamp_low = 0;
  std::uint16_t clamp_high = 0xffff;
  LoopTrigger trigger = LoopTrigger::kOnWrite;
  std::uint32_t tick_ms = 100;
};

struct SamplerConfig {
  std::size_t n_samples = 1000;
  double x_low = -10.0;
  double x_high = 10.0;
  double mix_ratio = 0.2;
  double power = 0.5;
  std::size_t pilot_points = 256;  // plant-backed probing only
};

struct ProcessProbeConfig {
  double value_low = 0.0;
  double value_high = 100.0;
  std::size_t points = 5;
  std::vector<std::uint32_t> digital_inputs;
  std::vector<std::uint32_t> analog_inputs;
  std::uint32_t output_addr = 0;
  std::uint16_t output_count = 1;
};

struct ProtocolConfig {
  Protocol protocol = Protocol::kModbus;
  std::vector<std::uint8_t> functions{1, 5, 15, 3, 6, 16};
  std::uint32_t digital_count = 40;
  std::uint32_t analog_count = 40;
  std::uint32_t addr_low = 0;
  std::optional<std::uint32_t> addr_high;  // overrides the counts for both areas
  std::uint32_t max_addr = 65535;
  std::uint16_t val_low = 0;
  std::uint16_t val_high = 65535;
  std::uint32_t m_elem = 2;
  std::size_t dataset_size = 1600;
  std::size_t context_len = 0;
  std::uint8_t unit_id = 1;
  // 0 reproduces the 144-sample pass; 1 is the elem+1 width as printed in the
  // original pseudocode.
  std::uint32_t comb_width_offset = 0;
  std::array<double, 3> split{0.8, 0.1, 0.1};
  std::uint16_t port = 0;  // 0 -> protocol default

  std::vector<MathBlockConfig> blocks;
  std::vector<ControlLoopConfig> loops;
  SamplerConfig sampler;
  ProcessProbeConfig process;

  AddressRange range(DataKind kind) const;
  bool allows(std::uint8_t function) const;
  std::uint16_t listen_port() const { return port != 0 ? port : default_port(protocol); }
};

/// Throws Error(kInvalidConfig) naming the offending key.
void validate(const ProtocolConfig& cfg);

ProtocolConfig parse_config(std::string_view json_text);
ProtocolConfig load_config(const std::string& path);
std::string config_to_json(const ProtocolConfig& cfg);

}  // namespace plcmimic
