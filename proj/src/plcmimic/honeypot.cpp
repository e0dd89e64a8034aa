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

#include "plcmimic/honeypot.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "plcmimic/dataset.hpp"
#include "plcmimic/error.hpp"
#include "plcmimic/protocol.hpp"
#include "plcmimic/s7comm.hpp"

namespace plcmimic {

namespace {

constexpr const char* kLogName = "interactions.jsonl";

std::string ip_of(const std::string& peer) {
  if (!peer.empty() && peer.front() == '[') return peer.substr(1, peer.find(']') - 1);
  return peer.substr(0, peer.rfind(':'));
}

}  // namespace

std::optional<Bytes> fallback_response(Protocol protocol, std::span<const std::uint8_t> request) {
  try {
    const Request req = parse_request(protocol, request);
    Outcome out;
    out.type = OutcomeType::kException;
    out.exception = kExcDeviceFailure;
    return build_response(req, out);
  } catch (const Error&) {
    return std::nullopt;
  }
}

Honeypot::Honeypot(ProtocolConfig cfg, std::shared_ptr<Responder> responder, HoneypotOptions options, bool ephemeral)
    : cfg_(std::move(cfg)), responder_(std::move(responder)), options_(std::move(options)) {
  if (!options_.log_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options_.log_dir, ec);
    sink_ = std::make_unique<JsonlSink>((std::filesystem::path(options_.log_dir) / kLogName).string());
  }
  const std::uint16_t port = ephemeral ? 0 : (options_.port != 0 ? options_.port : cfg_.listen_port());
  server_ = std::make_unique<net::TcpServer>(options_.host, port,
                                             [this](net::Socket& s, const std::string& peer) { serve(s, peer); });
}

Honeypot::~Honeypot() { stop(); }

void Honeypot::stop() {
  server_->stop();
  flush_log();
}

void Honeypot::flush_log() {
  if (sink_) sink_->flush();
}

void Honeypot::log(nlohmann::json record) {
  if (!sink_) return;
  record["seq"] = seq_.fetch_add(1);
  sink_->write(std::move(record));
}

void Honeypot::serve(net::Socket& sock, const std::string& peer) {
  using Clock = std::chrono::steady_clock;
  net::FrameReader reader(sock, cfg_.protocol);
  std::deque<SamplePair> context;
  Bytes frame;
  const auto record = [&](const char* dir, const Bytes& bytes, std::int64_t latency_us, const std::string& who) {
    log({{"ts", iso_timestamp(std::chrono::system_clock::now())},
         {"peer", peer},
         {"dir", dir},
         {"hex", to_hex(bytes)},
         {"latency_us", latency_us},
         {"responder", who}});
  };
  for (;;) {
    const auto status = reader.next(frame, std::chrono::milliseconds(-1));
    if (status != net::FrameReader::Status::kFrame) {
      if (!frame.empty()) record("drop", frame, 0, "none");
      return;
    }
    const auto t0 = Clock::now();
    record("in", frame, 0, responder_->name());
    const auto elapsed_us = [&] {
      return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0).count();
    };

    if (cfg_.protocol == Protocol::kS7Comm && s7::is_handshake(frame)) {
      const Bytes reply = s7::is_connect_request(frame) ? s7::connect_confirm(frame) : s7::setup_response(frame);
      sock.send_all(reply);
      record("out", reply, elapsed_us(), "oracle");
      continue;
    }

    const std::string query = to_hex(frame);
    std::string source;
    for (const auto& p : context) source += p.source_text + ":" + p.target_text + "|";
    source += cfg_.context_len > 0 ? query + ":" : query;

    std::optional<Bytes> reply;
    std::string who = responder_->name();
    try {
      const std::string answer = responder_->respond(source, options_.deadline);
      if (Clock::now() - t0 <= options_.deadline) {
        Bytes bytes = from_hex(canonical_hex(answer));
        if (!bytes.empty()) reply = std::move(bytes);
      }
    } catch (const std::exception&) {
    }
    if (!reply && options_.fallback == FallbackPolicy::kException) {
      reply = fallback_response(cfg_.protocol, frame);
      who = "fallback";
    }
    if (!reply) {
      record("drop", frame, elapsed_us(), "fallback");
      continue;
    }
    try {
      sock.send_all(*reply);
    } catch (const Error&) {
      record("drop", frame, elapsed_us(), who);
      return;
    }
    record("out", *reply, elapsed_us(), who);
    if (cfg_.context_len > 0) {
      context.push_back({query, to_hex(*reply)});
      while (context.size() > cfg_.context_len) context.pop_front();
    }
  }
}

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const double pos = q / 100.0 * static_cast<double>(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, samples.size() - 1);
  return samples[lo] + (pos - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

nlohmann::json summarize_logs(const std::string& path) {
  std::filesystem::path file = path;
  if (std::filesystem::is_directory(file)) file /= kLogName;
  std::ifstream in(file);
  if (!in) throw Error(Errc::kIo, file.string(), "cannot open interaction log");

  struct PerIp {
    std::size_t requests = 0, responses = 0, drops = 0;
    std::set<std::string> connections;
    std::string first_seen, last_seen;
    std::vector<double> latency;
  };
  std::map<std::string, PerIp> ips;
  std::map<std::string, std::vector<double>> by_responder;
  std::vector<double> all;
  std::string line;
  std::size_t line_no = 0, skipped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      ++skipped;
      continue;
    }
    const std::string peer = j.value("peer", "");
    const std::string dir = j.value("dir", "");
    const std::string ts = j.value("ts", "");
    auto& s = ips[ip_of(peer)];
    s.connections.insert(peer);
    if (s.first_seen.empty() || ts < s.first_seen) s.first_seen = ts;
    if (ts > s.last_seen) s.last_seen = ts;
    if (dir == "in") {
      ++s.requests;
    } else if (dir == "out") {
      ++s.responses;
      const double us = j.value("latency_us", 0.0);
      s.latency.push_back(us);
      all.push_back(us);
      by_responder[j.value("responder", "")].push_back(us);
    } else if (dir == "drop") {
      ++s.drops;
    }
  }
  const auto lat = [](const std::vector<double>& v) {
    return nlohmann::json{{"count", v.size()},
                          {"p50_us", percentile(v, 50)},
                          {"p90_us", percentile(v, 90)},
                          {"p99_us", percentile(v, 99)},
                          {"max_us", v.empty() ? 0.0 : *std::max_element(v.begin(), v.end())}};
  };
  nlohmann::json per_ip = nlohmann::json::object();
  for (const auto& [ip, s] : ips)
    per_ip[ip] = {{"requests", s.requests},       {"responses", s.responses},   {"drops", s.drops},
                  {"connections", s.connections.size()}, {"first_seen", s.first_seen}, {"last_seen", s.last_seen},
                  {"latency", lat(s.latency)}};
  nlohmann::json responders = nlohmann::json::object();
  for (const auto& [name, v] : by_responder) responders[name] = lat(v);
  return {{"ips", per_ip}, {"latency", lat(all)}, {"by_responder", responders}, {"malformed_lines", skipped}};
}

}  // namespace plcmimic
