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

#include "plcmimic/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "plcmimic/error.hpp"
#include "plcmimic/modbus.hpp"

namespace plcmimic {

using nlohmann::json;

std::string_view protocol_name(Protocol protocol) {
  return protocol == Protocol::kModbus ? "modbus" : "s7comm";
}

std::uint16_t default_port(Protocol protocol) { return protocol == Protocol::kModbus ? 502 : 102; }

std::string_view block_kind_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::kSgn: return "sgn";
    case BlockKind::kExpo10: return "expo10";
    case BlockKind::kCosh: return "cosh";
    case BlockKind::kSigmoid: return "sigmoid";
    case BlockKind::kCauchy: return "cauchy";
  }
  return "?";
}

std::optional<BlockKind> parse_block_kind(std::string_view name) {
  for (auto k : {BlockKind::kSgn, BlockKind::kExpo10, BlockKind::kCosh, BlockKind::kSigmoid, BlockKind::kCauchy})
    if (block_kind_name(k) == name) return k;
  return std::nullopt;
}

AddressRange ProtocolConfig::range(DataKind kind) const {
  if (addr_high) return {addr_low, *addr_high >= addr_low ? *addr_high - addr_low + 1 : 0};
  return {addr_low, kind == DataKind::kDigital ? digital_count : analog_count};
}

bool ProtocolConfig::allows(std::uint8_t function) const {
  return std::find(functions.begin(), functions.end(), function) != functions.end();
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& detail) {
  throw Error(Errc::kInvalidConfig, key, detail);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    bad(key, e.what());
  }
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<std::string_view> known) {
  if (!j.is_object()) bad(where.empty() ? "json" : where, "expected an object");
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      bad(where.empty() ? key : where + "." + key, "unknown key");
}

FixedPoint fixed_point(const json& j, const char* scale_key, const char* offset_key) {
  FixedPoint fp;
  fp.scale = get_or<double>(j, scale_key, fp.scale);
  fp.offset = get_or<double>(j, offset_key, fp.offset);
  return fp;
}

std::pair<std::uint16_t, std::uint16_t> clamp_pair(const json& j, std::uint16_t lo, std::uint16_t hi) {
  if (!j.contains("clamp")) return {lo, hi};
  auto v = get_or<std::vector<std::uint16_t>>(j, "clamp", {});
  if (v.size() != 2) bad("clamp", "expected [low, high]");
  return {v[0], v[1]};
}

MathBlockConfig parse_block(const json& j, const ProtocolConfig& cfg) {
  reject_unknown(j, "blocks", {"kind", "in_addr", "out_addr", "scale_in", "in_offset", "scale_out", "out_offset", "clamp"});
  MathBlockConfig b;
  auto kind = parse_block_kind(get_or<std::string>(j, "kind", "sigmoid"));
  if (!kind) bad("blocks.kind", "expected sgn|expo10|cosh|sigmoid|cauchy");
  b.kind = *kind;
  b.in_addr = get_or<std::uint32_t>(j, "in_addr", b.in_addr);
  b.out_addr = get_or<std::uint32_t>(j, "out_addr", b.out_addr);
  b.input = fixed_point(j, "scale_in", "in_offset");
  b.output = fixed_point(j, "scale_out", "out_offset");
  std::tie(b.clamp_low, b.clamp_high) = clamp_pair(j, cfg.val_low, cfg.val_high);
  return b;
}

ControlLoopConfig parse_loop(const json& j, const ProtocolConfig& cfg) {
  reject_unknown(j, "loops", {"name", "A", "B", "C", "x0", "u_addrs", "y_addrs", "scale_in", "in_offset", "scale_out",
                              "out_offset", "clamp", "trigger", "tick_ms"});
  ControlLoopConfig l;
  l.name = get_or<std::string>(j, "name", "loop");
  using Matrix = std::vector<std::vector<double>>;
  l.a = get_or<Matrix>(j, "A", {});
  l.b = get_or<Matrix>(j, "B", {});
  l.c = get_or<Matrix>(j, "C", {});
  l.x0 = get_or<std::vector<double>>(j, "x0", std::vector<double>(l.a.size(), 0.0));
  l.u_addrs = get_or<std::vector<std::uint32_t>>(j, "u_addrs", {});
  l.y_addrs = get_or<std::vector<std::uint32_t>>(j, "y_addrs", {});
  l.input = fixed_point(j, "scale_in", "in_offset");
  l.output = fixed_point(j, "scale_out", "out_offset");
  std::tie(l.clamp_low, l.clamp_high) = clamp_pair(j, cfg.val_low, cfg.val_high);
  auto trigger = get_or<std::string>(j, "trigger", "on_write");
  if (trigger == "on_write") {
    l.trigger = LoopTrigger::kOnWrite;
  } else if (trigger == "tick") {
    l.trigger = LoopTrigger::kTick;
  } else {
    bad("loops.trigger", "expected on_write|tick");
  }
  l.tick_ms = get_or<std::uint32_t>(j, "tick_ms", l.tick_ms);
  return l;
}

bool is_matrix(const std::vector<std::vector<double>>& m, std::size_t rows, std::size_t cols) {
  return m.size() == rows && std::all_of(m.begin(), m.end(), [cols](const auto& r) { return r.size() == cols; });
}

}  // namespace

void validate(const ProtocolConfig& cfg) {
  for (auto fc : cfg.functions)
    if (!modbus::is_supported_function(fc)) bad("functions", "unsupported function " + std::to_string(fc));
  if (cfg.max_addr > 65535) bad("max_addr", "protocol addresses are 16-bit");
  for (auto kind : {DataKind::kDigital, DataKind::kAnalog}) {
    auto r = cfg.range(kind);
    if (r.count > 0 && r.high() > cfg.max_addr) bad("addr_high", "valid range exceeds max_addr");
  }
  if (cfg.addr_high && *cfg.addr_high < cfg.addr_low) bad("addr_high", "addr_low > addr_high");
  if (cfg.val_low > cfg.val_high) bad("val_low", "val_low > val_high");
  if (cfg.m_elem < 1) bad("m_elem", "must be >= 1");
  const double total = cfg.split[0] + cfg.split[1] + cfg.split[2];
  if (std::any_of(cfg.split.begin(), cfg.split.end(), [](double r) { return r < 0; }) || std::abs(total - 1.0) > 1e-9)
    bad("split", "ratios must be nonnegative and sum to 1");
  for (const auto& b : cfg.blocks) {
    if (b.in_addr > cfg.max_addr || b.out_addr > cfg.max_addr) bad("blocks", "block address beyond max_addr");
    if (b.output.scale == 0.0 || b.input.scale == 0.0) bad("blocks", "scale must be nonzero");
    if (b.clamp_low > b.clamp_high) bad("blocks.clamp", "low > high");
  }
  for (const auto& l : cfg.loops) {
    const auto n = l.a.size();
    if (n == 0) bad("loops." + l.name + ".A", "empty state");
    if (!is_matrix(l.a, n, n)) bad("loops." + l.name + ".A", "must be n x n");
    if (!is_matrix(l.b, n, l.u_addrs.size())) bad("loops." + l.name + ".B", "must be n x len(u_addrs)");
    if (!is_matrix(l.c, l.y_addrs.size(), n)) bad("loops." + l.name + ".C", "must be len(y_addrs) x n");
    if (l.x0.size() != n) bad("loops." + l.name + ".x0", "must have n entries");
    for (auto a : l.u_addrs)
      if (a > cfg.max_addr) bad("loops." + l.name + ".u_addrs", "beyond max_addr");
    for (auto a : l.y_addrs)
      if (a > cfg.max_addr) bad("loops." + l.name + ".y_addrs", "beyond max_addr");
    if (l.trigger == LoopTrigger::kTick && l.tick_ms == 0) bad("loops." + l.name + ".tick_ms", "must be > 0");
  }
  const auto& s = cfg.sampler;
  if (!(s.x_low < s.x_high)) bad("sampler.x_low", "x_low must be < x_high");
  if (s.mix_ratio < 0 || s.mix_ratio > 1) bad("sampler.mix_ratio", "must be in [0, 1]");
  if (!(s.power > 0 && s.power <= 1)) bad("sampler.power", "must be in (0, 1]");
  if (s.n_samples < 2) bad("sampler.n_samples", "need at least 2 grid points");
  if (cfg.process.points < 1) bad("process.points", "must be >= 1");
}

ProtocolConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad("json", e.what());
  }
  if (!j.is_object()) bad("json", "top level must be an object");
  reject_unknown(j, "", {"protocol", "functions", "digital_count", "analog_count", "addr_low", "addr_high", "max_addr",
                         "val_low", "val_high", "m_elem", "dataset_size", "context_len", "unit_id", "comb_width_offset",
                         "port", "split", "blocks", "loops", "sampler", "process"});

  ProtocolConfig cfg;
  auto proto = get_or<std::string>(j, "protocol", "modbus");
  if (proto == "modbus") {
    cfg.protocol = Protocol::kModbus;
  } else if (proto == "s7comm" || proto == "s7") {
    cfg.protocol = Protocol::kS7Comm;
  } else {
    bad("protocol", "expected modbus|s7comm");
  }
  cfg.functions = get_or<std::vector<std::uint8_t>>(j, "functions", cfg.functions);
  cfg.digital_count = get_or<std::uint32_t>(j, "digital_count", cfg.digital_count);
  cfg.analog_count = get_or<std::uint32_t>(j, "analog_count", cfg.analog_count);
  cfg.addr_low = get_or<std::uint32_t>(j, "addr_low", cfg.addr_low);
  if (j.contains("addr_high") && !j["addr_high"].is_null()) cfg.addr_high = get_or<std::uint32_t>(j, "addr_high", 0);
  cfg.max_addr = get_or<std::uint32_t>(j, "max_addr", cfg.max_addr);
  cfg.val_low = get_or<std::uint16_t>(j, "val_low", cfg.val_low);
  cfg.val_high = get_or<std::uint16_t>(j, "val_high", cfg.val_high);
  cfg.m_elem = get_or<std::uint32_t>(j, "m_elem", cfg.m_elem);
  cfg.dataset_size = get_or<std::size_t>(j, "dataset_size", cfg.dataset_size);
  cfg.context_len = get_or<std::size_t>(j, "context_len", cfg.context_len);
  cfg.unit_id = get_or<std::uint8_t>(j, "unit_id", cfg.unit_id);
  cfg.comb_width_offset = get_or<std::uint32_t>(j, "comb_width_offset", cfg.comb_width_offset);
  cfg.port = get_or<std::uint16_t>(j, "port", cfg.port);
  if (j.contains("split")) {
    auto v = get_or<std::vector<double>>(j, "split", {});
    if (v.size() != 3) bad("split", "expected [train, validation, test]");
    cfg.split = {v[0], v[1], v[2]};
  }
  if (auto it = j.find("blocks"); it != j.end())
    for (const auto& b : *it) cfg.blocks.push_back(parse_block(b, cfg));
  if (auto it = j.find("loops"); it != j.end())
    for (const auto& l : *it) cfg.loops.push_back(parse_loop(l, cfg));
  if (auto it = j.find("sampler"); it != j.end()) {
    reject_unknown(*it, "sampler", {"n_samples", "x_low", "x_high", "mix_ratio", "power", "pilot_points"});
    auto& s = cfg.sampler;
    s.n_samples = get_or<std::size_t>(*it, "n_samples", s.n_samples);
    s.x_low = get_or<double>(*it, "x_low", s.x_low);
    s.x_high = get_or<double>(*it, "x_high", s.x_high);
    s.mix_ratio = get_or<double>(*it, "mix_ratio", s.mix_ratio);
    s.power = get_or<double>(*it, "power", s.power);
    s.pilot_points = get_or<std::size_t>(*it, "pilot_points", s.pilot_points);
  }
  if (auto it = j.find("process"); it != j.end()) {
    reject_unknown(*it, "process", {"value_low", "value_high", "points", "digital_inputs", "analog_inputs", "output_addr",
                                    "output_count"});
    auto& p = cfg.process;
    p.value_low = get_or<double>(*it, "value_low", p.value_low);
    p.value_high = get_or<double>(*it, "value_high", p.value_high);
    p.points = get_or<std::size_t>(*it, "points", p.points);
    p.digital_inputs = get_or<std::vector<std::uint32_t>>(*it, "digital_inputs", {});
    p.analog_inputs = get_or<std::vector<std::uint32_t>>(*it, "analog_inputs", {});
    p.output_addr = get_or<std::uint32_t>(*it, "output_addr", p.output_addr);
    p.output_count = get_or<std::uint16_t>(*it, "output_count", p.output_count);
  }
  validate(cfg);
  return cfg;
}

ProtocolConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, path, "cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ProtocolConfig& cfg) {
  json j;
  j["protocol"] = protocol_name(cfg.protocol);
  j["functions"] = cfg.functions;
  j["digital_count"] = cfg.digital_count;
  j["analog_count"] = cfg.analog_count;
  j["addr_low"] = cfg.addr_low;
  if (cfg.addr_high) j["addr_high"] = *cfg.addr_high;
  j["max_addr"] = cfg.max_addr;
  j["val_low"] = cfg.val_low;
  j["val_high"] = cfg.val_high;
  j["m_elem"] = cfg.m_elem;
  j["dataset_size"] = cfg.dataset_size;
  j["context_len"] = cfg.context_len;
  j["unit_id"] = cfg.unit_id;
  j["comb_width_offset"] = cfg.comb_width_offset;
  j["split"] = cfg.split;
  j["port"] = cfg.listen_port();
  for (const auto& b : cfg.blocks) {
    j["blocks"].push_back({{"kind", block_kind_name(b.kind)},
                           {"in_addr", b.in_addr},
                           {"out_addr", b.out_addr},
                           {"scale_in", b.input.scale},
                           {"in_offset", b.input.offset},
                           {"scale_out", b.output.scale},
                           {"out_offset", b.output.offset},
                           {"clamp", {b.clamp_low, b.clamp_high}}});
  }
  for (const auto& l : cfg.loops) {
    j["loops"].push_back({{"name", l.name},
                          {"A", l.a},
                          {"B", l.b},
                          {"C", l.c},
                          {"x0", l.x0},
                          {"u_addrs", l.u_addrs},
                          {"y_addrs", l.y_addrs},
                          {"scale_in", l.input.scale},
                          {"in_offset", l.input.offset},
                          {"scale_out", l.output.scale},
                          {"out_offset", l.output.offset},
                          {"clamp", {l.clamp_low, l.clamp_high}},
                          {"trigger", l.trigger == LoopTrigger::kTick ? "tick" : "on_write"},
                          {"tick_ms", l.tick_ms}});
  }
  const auto& s = cfg.sampler;
  j["sampler"] = {{"n_samples", s.n_samples}, {"x_low", s.x_low},         {"x_high", s.x_high},
                  {"mix_ratio", s.mix_ratio}, {"power", s.power},         {"pilot_points", s.pilot_points}};
  const auto& p = cfg.process;
  j["process"] = {{"value_low", p.value_low},         {"value_high", p.value_high},
                  {"points", p.points},               {"digital_inputs", p.digital_inputs},
                  {"analog_inputs", p.analog_inputs}, {"output_addr", p.output_addr},
                  {"output_count", p.output_count}};
  return j.dump(2);
}

}  // namespace plcmimic
