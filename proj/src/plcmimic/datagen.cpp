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

#include "plcmimic/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "plcmimic/error.hpp"
#include "plcmimic/logsink.hpp"
#include "plcmimic/modbus.hpp"
#include "plcmimic/s7comm.hpp"
#include "plcmimic/sampling.hpp"

namespace plcmimic {

namespace {

std::uint8_t read_fc(DataKind k) { return k == DataKind::kDigital ? modbus::kReadCoils : modbus::kReadHoldingRegisters; }
std::uint8_t single_fc(DataKind k) {
  return k == DataKind::kDigital ? modbus::kWriteSingleCoil : modbus::kWriteSingleRegister;
}
std::uint8_t multi_fc(DataKind k) {
  return k == DataKind::kDigital ? modbus::kWriteMultipleCoils : modbus::kWriteMultipleRegisters;
}

// Write operation using the configured functions, if any fits.
std::optional<Operation> write_op(const ProtocolConfig& cfg, DataKind kind, std::uint32_t addr,
                                  std::vector<std::uint16_t> data) {
  Operation op{Access::kWrite, kind, addr, 0, std::move(data), false};
  if (op.values.size() == 1 && cfg.allows(single_fc(kind))) return op;
  if (!cfg.allows(multi_fc(kind))) return std::nullopt;
  op.force_multiple = true;
  return op;
}

std::optional<Operation> read_op(const ProtocolConfig& cfg, DataKind kind, std::uint32_t addr, std::uint16_t count) {
  if (!cfg.allows(read_fc(kind))) return std::nullopt;
  return Operation{Access::kRead, kind, addr, count, {}, false};
}

std::vector<DataKind> active_kinds(const ProtocolConfig& cfg) {
  std::vector<DataKind> out;
  for (auto k : {DataKind::kDigital, DataKind::kAnalog}) {
    if (cfg.range(k).count == 0) continue;
    if (cfg.allows(read_fc(k)) || cfg.allows(single_fc(k)) || cfg.allows(multi_fc(k))) out.push_back(k);
  }
  return out;
}

// Register values of a read response, or nullopt for anything else.
std::optional<std::vector<std::uint16_t>> read_values(Protocol protocol, const Bytes& response) {
  try {
    if (protocol == Protocol::kModbus) {
      const auto f = modbus::decode(response, modbus::Direction::kResponse);
      if (const auto* r = std::get_if<modbus::ReadResponse>(&f.pdu.body)) return modbus::unpack_words(r->values);
      return std::nullopt;
    }
    const auto f = s7::decode(response);
    if (f.is_error() || f.data.size() != 1 || f.data[0].return_code != s7::kReturnSuccess) return std::nullopt;
    return modbus::unpack_words(f.data[0].data);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

// --- probes ----------------------------------------------------------------

LocalProbe::LocalProbe(Plant& plant) : plant_(plant) {
  if (plant_.config().protocol != Protocol::kS7Comm) return;
  for (const Bytes& req : {s7::connect_request(), s7::setup_request(0)}) exchange(req);
}

std::optional<Bytes> LocalProbe::exchange(std::span<const std::uint8_t> request) {
  Exchange e;
  e.sent = std::chrono::system_clock::now();
  e.request.assign(request.begin(), request.end());
  e.response = plant_.handle(request);
  e.received = std::chrono::system_clock::now();
  transcript_.push_back(e);
  return e.response;
}

std::pair<net::Endpoint, net::Endpoint> LocalProbe::endpoints() const {
  return {{"127.0.0.1", 40000}, {"127.0.0.1", plant_.config().listen_port()}};
}

TcpProbe::TcpProbe(net::Endpoint target, Protocol protocol, std::chrono::milliseconds timeout, int retries)
    : target_(std::move(target)), protocol_(protocol), timeout_(timeout), retries_(retries) {}

void TcpProbe::connect() {
  reader_.reset();
  sock_ = net::connect_tcp(target_, timeout_);
  reader_ = std::make_unique<net::FrameReader>(sock_, protocol_);
  local_ = net::local_endpoint(sock_.fd());
  if (protocol_ == Protocol::kS7Comm) {
    roundtrip(s7::connect_request());
    roundtrip(s7::setup_request(0));
  }
}

Bytes TcpProbe::roundtrip(std::span<const std::uint8_t> request) {
  Exchange e;
  e.sent = std::chrono::system_clock::now();
  e.request.assign(request.begin(), request.end());
  sock_.send_all(request);
  switch (reader_->next(e.response, timeout_)) {
    case net::FrameReader::Status::kFrame:
      break;
    case net::FrameReader::Status::kTimeout:
      throw Error(Errc::kProbeTimeout, "response", "no reply within " + std::to_string(timeout_.count()) + " ms");
    default:
      throw Error(Errc::kConnectionLost, "response", "target closed the connection");
  }
  e.received = std::chrono::system_clock::now();
  transcript_.push_back(e);
  return e.response;
}

std::optional<Bytes> TcpProbe::exchange(std::span<const std::uint8_t> request) {
  std::string last;
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    if (!sock_.valid()) {
      try {
        connect();
      } catch (const Error& e) {
        sock_.close();
        if (attempt == retries_) throw Error(Errc::kConnectionLost, "target", target_.str() + ": " + e.what());
        last = e.what();
        continue;
      }
    }
    try {
      return roundtrip(request);
    } catch (const Error& e) {
      if (e.code() != Errc::kProbeTimeout && e.code() != Errc::kConnectionLost) throw;
      last = e.what();
      sock_.close();
    }
  }
  ++skipped_;
  std::fprintf(stderr, "probe: skipping %s after %d retries: %s\n", to_hex(request).c_str(), retries_, last.c_str());
  return std::nullopt;
}

std::pair<net::Endpoint, net::Endpoint> TcpProbe::endpoints() const {
  net::Endpoint remote = target_;
  if (sock_.valid()) remote = net::remote_endpoint(sock_.fd());
  return {local_, remote};
}

std::optional<Bytes> ProbeSession::run(const Operation& op, std::vector<SamplePair>& out) {
  const Bytes req = build_request(cfg_.protocol, next_id_++, cfg_.unit_id, op);
  auto resp = client_.exchange(req);
  if (resp) out.push_back({to_hex(req), to_hex(*resp)});
  return resp;
}

// --- boundary probing --------------------------------------------------------

std::vector<SamplePair> boundaries_pass(ProbeSession& session, const ProtocolConfig& cfg, DataKind kind, Rng& rng,
                                        std::size_t limit) {
  std::vector<SamplePair> out;
  const auto range = cfg.range(kind);
  for (std::uint32_t elem = 1; elem <= cfg.m_elem; ++elem) {
    const auto bounds = triplet(range.low, range.high(), cfg.m_elem, rng);
    const auto e_bounds = triplet(static_cast<std::int64_t>(range.high()) + 1, cfg.max_addr, cfg.m_elem, rng);
    std::vector<std::int64_t> addrs(bounds.begin(), bounds.end());
    addrs.insert(addrs.end(), e_bounds.begin(), e_bounds.end());
    for (auto addr : addrs) {
      const auto values = value_triplet(cfg, kind, rng);
      for (auto& data : combs(values, elem + cfg.comb_width_offset)) {
        const auto a = static_cast<std::uint32_t>(addr);
        if (out.size() >= limit) return out;
        if (auto w = write_op(cfg, kind, a, std::move(data))) session.run(*w, out);
        if (out.size() >= limit) return out;
        if (auto r = read_op(cfg, kind, a, static_cast<std::uint16_t>(elem))) session.run(*r, out);
      }
    }
  }
  return out;
}

std::vector<SamplePair> execute_boundaries(ProbeSession& session, const ProtocolConfig& cfg, Rng& rng) {
  const auto kinds = active_kinds(cfg);
  if (kinds.empty()) throw Error(Errc::kInvalidConfig, "functions", "no point kind has a usable function");
  std::vector<SamplePair> out;
  for (std::size_t pass = 0; out.size() < cfg.dataset_size; ++pass) {
    auto batch = boundaries_pass(session, cfg, kinds[pass % kinds.size()], rng, cfg.dataset_size - out.size());
    if (batch.empty()) throw Error(Errc::kConnectionLost, "target", "a full pass produced no pairs");
    out.insert(out.end(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
  }
  return out;
}

// --- math blocks ---------------------------------------------------------------

std::uint16_t encode_input(const MathBlockConfig& block, double x) {
  const double counts = std::round((x - block.input.offset) / block.input.scale);
  return static_cast<std::uint16_t>(std::clamp(counts, 0.0, 65535.0));
}

std::vector<SamplePair> probe_math(ProbeSession& session, const MathBlockConfig& block, const std::vector<double>& xs) {
  std::vector<SamplePair> out;
  for (double x : xs) {
    session.run(Operation{Access::kWrite, DataKind::kAnalog, block.in_addr, 0, {encode_input(block, x)}, false}, out);
    session.run(Operation{Access::kRead, DataKind::kAnalog, block.out_addr, 1, {}, false}, out);
  }
  return out;
}

std::function<double(double)> pilot_probe(ProbeSession& session, const MathBlockConfig& block, double x_low,
                                          double x_high, std::size_t points) {
  if (points < 2) throw Error(Errc::kInvalidConfig, "sampler.pilot_points", "need at least 2");
  std::vector<double> xs, ys;
  std::vector<SamplePair> scratch;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = x_low + (x_high - x_low) * static_cast<double>(i) / static_cast<double>(points - 1);
    session.run(Operation{Access::kWrite, DataKind::kAnalog, block.in_addr, 0, {encode_input(block, x)}, false},
                scratch);
    const auto resp = session.run(Operation{Access::kRead, DataKind::kAnalog, block.out_addr, 1, {}, false}, scratch);
    if (!resp) continue;
    const auto vals = read_values(session.config().protocol, *resp);
    if (!vals || vals->size() != 1) continue;
    xs.push_back(x);
    ys.push_back(block.output.to_real((*vals)[0]));
  }
  if (xs.size() < 2) throw Error(Errc::kConnectionLost, "target", "pilot probe got fewer than 2 readings");
  return [xs = std::move(xs), ys = std::move(ys)](double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
    return ys[hi - 1] + t * (ys[hi] - ys[hi - 1]);
  };
}

// --- process probing -----------------------------------------------------------

std::vector<std::uint16_t> even_values(double low, double high, std::size_t points) {
  std::vector<std::uint16_t> out;
  if (points == 0) return out;
  for (std::size_t i = 0; i < points; ++i) {
    const double v = points == 1 ? low : low + (high - low) * static_cast<double>(i) / static_cast<double>(points - 1);
    out.push_back(static_cast<std::uint16_t>(std::clamp(std::round(v), 0.0, 65535.0)));
  }
  return out;
}

std::vector<SamplePair> valid_function(ProbeSession& session, const ProtocolConfig& cfg) {
  std::vector<SamplePair> out;
  const auto& p = cfg.process;
  const auto sweep = [&](DataKind kind, const std::vector<std::uint32_t>& inputs,
                         const std::vector<std::uint16_t>& values) {
    for (auto addr : inputs)
      for (std::uint32_t elem = 1; elem <= cfg.m_elem; ++elem) {
        if (!cfg.range(kind).contains(addr, elem)) continue;
        for (auto v : values) {
          if (auto w = write_op(cfg, kind, addr, std::vector<std::uint16_t>(elem, v))) session.run(*w, out);
          if (auto r = read_op(cfg, DataKind::kAnalog, p.output_addr, p.output_count)) session.run(*r, out);
        }
      }
  };
  sweep(DataKind::kDigital, p.digital_inputs, {0, 1});
  sweep(DataKind::kAnalog, p.analog_inputs, even_values(p.value_low, p.value_high, p.points));
  return out;
}

std::vector<SamplePair> exception_function(ProbeSession& session, const ProtocolConfig& cfg, Rng& rng) {
  std::vector<SamplePair> out;
  for (auto kind : active_kinds(cfg)) {
    const auto range = cfg.range(kind);
    for (auto addr : triplet(static_cast<std::int64_t>(range.high()) + 1, cfg.max_addr, cfg.m_elem, rng)) {
      const auto a = static_cast<std::uint32_t>(addr);
      const std::uint16_t v = kind == DataKind::kDigital ? 1 : cfg.val_low;
      if (auto w = write_op(cfg, kind, a, {v})) session.run(*w, out);
      if (auto r = read_op(cfg, kind, a, 1)) session.run(*r, out);
    }
  }
  return out;
}

std::vector<SamplePair> probe_process(ProbeSession& session, const ProtocolConfig& cfg, Rng& rng) {
  auto out = valid_function(session, cfg);
  auto exc = exception_function(session, cfg, rng);
  out.insert(out.end(), exc.begin(), exc.end());
  return out;
}

// --- transcripts -----------------------------------------------------------------

std::string transcript_jsonl(const ProbeClient& client) {
  const std::string peer = client.endpoints().first.str();
  std::string out;
  for (const auto& e : client.transcript()) {
    out += nlohmann::json{{"ts", iso_timestamp(e.sent)}, {"peer", peer}, {"dir", "in"}, {"hex", to_hex(e.request)}}
               .dump() +
           "\n";
    out += nlohmann::json{{"ts", iso_timestamp(e.received)}, {"peer", peer}, {"dir", "out"}, {"hex", to_hex(e.response)}}
               .dump() +
           "\n";
  }
  return out;
}

std::vector<WireSegment> transcript_segments(const ProbeClient& client) {
  const auto [local, remote] = client.endpoints();
  std::vector<WireSegment> out;
  for (const auto& e : client.transcript()) {
    out.push_back({e.sent, local.host, local.port, remote.host, remote.port, e.request});
    out.push_back({e.received, remote.host, remote.port, local.host, local.port, e.response});
  }
  return out;
}

// --- driver ----------------------------------------------------------------------

std::optional<GenMode> parse_gen_mode(std::string_view name) {
  if (name == "boundaries") return GenMode::kBoundaries;
  if (name == "math") return GenMode::kMath;
  if (name == "process") return GenMode::kProcess;
  return std::nullopt;
}

GenResult generate_dataset(const ProtocolConfig& cfg, const GenOptions& options) {
  validate(cfg);
  Rng rng(options.seed);
  std::unique_ptr<Plant> plant;
  std::unique_ptr<ProbeClient> client;
  if (options.target.empty()) {
    plant = std::make_unique<Plant>(cfg);
    client = std::make_unique<LocalProbe>(*plant);
  } else {
    client = std::make_unique<TcpProbe>(net::parse_endpoint(options.target), cfg.protocol, options.timeout);
  }
  ProbeSession session(*client, cfg);
  GenResult result;
  switch (options.mode) {
    case GenMode::kBoundaries:
      result.pairs = execute_boundaries(session, cfg, rng);
      break;
    case GenMode::kMath: {
      if (cfg.blocks.empty()) throw Error(Errc::kInvalidConfig, "blocks", "math mode needs a block");
      const auto& block = cfg.blocks.front();
      const std::size_t mark = client->transcript().size();
      const auto probe = pilot_probe(session, block, cfg.sampler.x_low, cfg.sampler.x_high, cfg.sampler.pilot_points);
      client->forget(mark, client->transcript().size());
      result.pairs = probe_math(session, block, weighted_x_samples(cfg.sampler, probe, rng));
      break;
    }
    case GenMode::kProcess:
      result.pairs = probe_process(session, cfg, rng);
      break;
  }
  result.skipped = client->skipped();
  if (!options.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    const std::filesystem::path dir(options.out_dir);
    write_csv((dir / "dataset.csv").string(), result.pairs);
    std::ofstream log(dir / "capture.jsonl", std::ios::trunc);
    log << transcript_jsonl(*client);
    if (!log) throw Error(Errc::kIo, (dir / "capture.jsonl").string(), "write failed");
  }
  if (!options.pcap_path.empty()) write_pcap(options.pcap_path, transcript_segments(*client));
  return result;
}

// --- dataset sizing --------------------------------------------------------------

SizingReport iterative_sizing(const Trainer& trainer, const SizingConfig& cfg) {
  if (!trainer) throw Error(Errc::kTrainerUnavailable, "trainer", "no trainer configured");
  if (cfg.start == 0 || cfg.patience == 0) throw Error(Errc::kInvalidConfig, "sizing", "start and patience must be >= 1");
  SizingReport report;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  for (std::size_t size = cfg.start; size <= cfg.max_size; size *= 2) {
    const double score = trainer(size);
    report.history.emplace_back(size, score);
    if (score > best) {
      best = score;
      report.best_size = size;
      report.best_score = score;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  return report;
}

}  // namespace plcmimic
