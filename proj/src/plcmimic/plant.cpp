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

#include "plcmimic/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plcmimic/error.hpp"
#include "plcmimic/protocol.hpp"
#include "plcmimic/s7comm.hpp"

namespace plcmimic {

namespace {

std::size_t area_size(const ProtocolConfig& cfg, DataKind kind) {
  const auto r = cfg.range(kind);
  std::size_t n = r.count == 0 ? 0 : static_cast<std::size_t>(r.high()) + 1;
  if (kind == DataKind::kAnalog) {
    for (const auto& b : cfg.blocks) n = std::max<std::size_t>({n, b.in_addr + 1u, b.out_addr + 1u});
    for (const auto& l : cfg.loops) {
      for (auto a : l.u_addrs) n = std::max<std::size_t>(n, a + 1u);
      for (auto a : l.y_addrs) n = std::max<std::size_t>(n, a + 1u);
    }
  }
  return n;
}

std::uint16_t block_lo(const ProtocolConfig& cfg, std::uint16_t clamp_low) { return std::max(clamp_low, cfg.val_low); }
std::uint16_t block_hi(const ProtocolConfig& cfg, std::uint16_t clamp_high) { return std::min(clamp_high, cfg.val_high); }

void after_analog_write(PlantState& state, const ProtocolConfig& cfg, std::uint32_t address, std::uint16_t count) {
  const auto touched = [&](std::uint32_t a) { return a >= address && a < address + count; };
  for (const auto& b : cfg.blocks) {
    if (!touched(b.in_addr)) continue;
    const double y = eval_block(b.kind, b.input.to_real(state.holding[b.in_addr]));
    state.holding[b.out_addr] = to_counts(b.output, y, block_lo(cfg, b.clamp_low), block_hi(cfg, b.clamp_high));
  }
  for (std::size_t i = 0; i < cfg.loops.size(); ++i) {
    const auto& l = cfg.loops[i];
    if (l.trigger != LoopTrigger::kOnWrite) continue;
    if (std::any_of(l.u_addrs.begin(), l.u_addrs.end(), touched)) step_loop(state, cfg, i);
  }
}

Outcome execute(PlantState& state, const ProtocolConfig& cfg, const Request& req) {
  Outcome out;
  const auto fail = [&](std::uint8_t code) {
    out.type = OutcomeType::kException;
    out.exception = code;
    return out;
  };
  if (!req.supported || std::find(cfg.functions.begin(), cfg.functions.end(), req.function) == cfg.functions.end())
    return fail(kExcIllegalFunction);
  if (req.malformed || req.count == 0) return fail(kExcIllegalValue);
  if (req.protocol == Protocol::kModbus) {
    const bool digital = req.kind == DataKind::kDigital;
    const std::uint16_t limit = req.access == Access::kRead ? (digital ? 2000 : 125) : (digital ? 1968 : 123);
    if (req.count > limit) return fail(kExcIllegalValue);
  }
  const auto range = cfg.range(req.kind);
  if (!req.mapped || req.address < range.low ||
      static_cast<std::uint64_t>(req.address) + req.count > static_cast<std::uint64_t>(range.low) + range.count)
    return fail(kExcIllegalAddress);

  if (req.access == Access::kRead) {
    out.type = OutcomeType::kValues;
    for (std::uint32_t a = req.address; a < req.address + req.count; ++a)
      out.values.push_back(req.kind == DataKind::kDigital ? state.coils[a] : state.holding[a]);
    return out;
  }
  if (!req.value_encoding_ok) return fail(kExcIllegalValue);
  if (req.kind == DataKind::kAnalog) {
    for (auto v : req.values)
      if (v < cfg.val_low || v > cfg.val_high) return fail(kExcIllegalValue);
    std::copy(req.values.begin(), req.values.end(), state.holding.begin() + req.address);
    after_analog_write(state, cfg, req.address, req.count);
  } else {
    for (std::size_t i = 0; i < req.values.size(); ++i) state.coils[req.address + i] = req.values[i] ? 1 : 0;
  }
  out.type = OutcomeType::kWriteOk;
  return out;
}

}  // namespace

PlantState initial_state(const ProtocolConfig& cfg) {
  PlantState s;
  s.coils.assign(area_size(cfg, DataKind::kDigital), 0);
  s.holding.assign(area_size(cfg, DataKind::kAnalog), 0);
  for (const auto& l : cfg.loops) s.loop_x.push_back(l.x0.empty() ? std::vector<double>(l.a.size(), 0.0) : l.x0);
  recompute_blocks(s, cfg);
  return s;
}

double eval_block(BlockKind kind, double x) {
  switch (kind) {
    case BlockKind::kSgn:
      return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
    case BlockKind::kExpo10:
      return std::pow(10.0, x);
    case BlockKind::kCosh:
      return std::cosh(x);
    case BlockKind::kSigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case BlockKind::kCauchy:
      return 1.0 / (std::numbers::pi * (1.0 + x * x));
  }
  return 0.0;
}

std::uint16_t to_counts(const FixedPoint& fp, double real, std::uint16_t lo, std::uint16_t hi) {
  const double counts = std::round((real - fp.offset) / fp.scale);
  if (std::isnan(counts)) return lo;
  if (counts <= lo) return lo;
  if (counts >= hi) return hi;
  return static_cast<std::uint16_t>(counts);
}

void recompute_blocks(PlantState& state, const ProtocolConfig& cfg) {
  for (const auto& b : cfg.blocks) {
    const double y = eval_block(b.kind, b.input.to_real(state.holding[b.in_addr]));
    state.holding[b.out_addr] = to_counts(b.output, y, block_lo(cfg, b.clamp_low), block_hi(cfg, b.clamp_high));
  }
}

void step_loop(PlantState& state, const ProtocolConfig& cfg, std::size_t index) {
  const auto& l = cfg.loops.at(index);
  auto& x = state.loop_x.at(index);
  std::vector<double> u(l.u_addrs.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = l.input.to_real(state.holding[l.u_addrs[i]]);
  std::vector<double> next(x.size(), 0.0);
  for (std::size_t r = 0; r < x.size(); ++r) {
    for (std::size_t c = 0; c < x.size(); ++c) next[r] += l.a[r][c] * x[c];
    for (std::size_t c = 0; c < u.size(); ++c) next[r] += l.b[r][c] * u[c];
  }
  x = std::move(next);
  for (std::size_t r = 0; r < l.y_addrs.size(); ++r) {
    double y = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) y += l.c[r][c] * x[c];
    state.holding[l.y_addrs[r]] = to_counts(l.output, y, block_lo(cfg, l.clamp_low), block_hi(cfg, l.clamp_high));
  }
}

Bytes handle_request(PlantState& state, const ProtocolConfig& cfg, std::span<const std::uint8_t> request) {
  if (cfg.protocol == Protocol::kS7Comm) {
    if (s7::is_connect_request(request)) return s7::connect_confirm(request);
    if (s7::is_setup_request(request)) return s7::setup_response(request);
  }
  const Request req = parse_request(cfg.protocol, request);
  return build_response(req, execute(state, cfg, req));
}

Plant::Plant(ProtocolConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  state_ = initial_state(cfg_);
}

Bytes Plant::handle(std::span<const std::uint8_t> request) {
  std::lock_guard lock(mu_);
  return handle_request(state_, cfg_, request);
}

std::string Plant::handle_hex(std::string_view request_hex) {
  const Bytes req = from_hex(request_hex);
  return to_hex(handle(req));
}

void Plant::tick() {
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < cfg_.loops.size(); ++i)
    if (cfg_.loops[i].trigger == LoopTrigger::kTick) step_loop(state_, cfg_, i);
}

PlantState Plant::snapshot() const {
  std::lock_guard lock(mu_);
  return state_;
}

bool Plant::has_tick_loops() const noexcept {
  return std::any_of(cfg_.loops.begin(), cfg_.loops.end(),
                     [](const ControlLoopConfig& l) { return l.trigger == LoopTrigger::kTick; });
}

}  // namespace plcmimic
