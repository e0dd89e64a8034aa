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

#include "plcmimic/pcap.hpp"

#include <arpa/inet.h>

#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "plcmimic/error.hpp"
#include "plcmimic/logsink.hpp"
#include "plcmimic/protocol.hpp"

namespace plcmimic {

namespace {

constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
constexpr std::uint32_t kLinkNull = 0;
constexpr std::uint32_t kLinkEthernet = 1;
constexpr std::uint32_t kLinkRaw = 101;
constexpr std::uint32_t kLinkLinuxSll = 113;

constexpr std::size_t kMinFrame = 7;
constexpr std::size_t kMaxFrame = 4096;

std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t o) {
  return static_cast<std::uint16_t>((b[o] << 8) | b[o + 1]);
}
std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t o) {
  return (static_cast<std::uint32_t>(b[o]) << 24) | (static_cast<std::uint32_t>(b[o + 1]) << 16) |
         (static_cast<std::uint32_t>(b[o + 2]) << 8) | b[o + 3];
}
std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t o) {
  return (static_cast<std::uint32_t>(b[o + 3]) << 24) | (static_cast<std::uint32_t>(b[o + 2]) << 16) |
         (static_cast<std::uint32_t>(b[o + 1]) << 8) | b[o];
}

struct TcpPacket {
  std::string src, dst;  // printable addresses
  std::uint16_t sport = 0, dport = 0;
  std::uint32_t seq = 0;
  bool syn = false;
  std::span<const std::uint8_t> payload;
};

std::string ip_text(int family, const std::uint8_t* addr) {
  char buf[INET6_ADDRSTRLEN] = {};
  ::inet_ntop(family, addr, buf, sizeof(buf));
  return family == AF_INET6 ? "[" + std::string(buf) + "]" : std::string(buf);
}

std::optional<TcpPacket> parse_tcp(std::span<const std::uint8_t> seg, std::string src, std::string dst) {
  if (seg.size() < 20) return std::nullopt;
  const std::size_t off = static_cast<std::size_t>(seg[12] >> 4) * 4;
  if (off < 20 || off > seg.size()) return std::nullopt;
  TcpPacket p;
  p.src = std::move(src);
  p.dst = std::move(dst);
  p.sport = be16(seg, 0);
  p.dport = be16(seg, 2);
  p.seq = be32(seg, 4);
  p.syn = (seg[13] & 0x02) != 0;
  p.payload = seg.subspan(off);
  return p;
}

std::optional<TcpPacket> parse_ip(std::span<const std::uint8_t> ip) {
  if (ip.empty()) return std::nullopt;
  const int version = ip[0] >> 4;
  if (version == 4) {
    if (ip.size() < 20) return std::nullopt;
    const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
    const std::size_t total = be16(ip, 2);
    if (ihl < 20 || total < ihl || total > ip.size()) return std::nullopt;
    if (ip[9] != 6) return std::nullopt;
    if ((be16(ip, 6) & 0x3fff) != 0) return std::nullopt;  // fragments
    return parse_tcp(ip.subspan(ihl, total - ihl), ip_text(AF_INET, &ip[12]), ip_text(AF_INET, &ip[16]));
  }
  if (version == 6) {
    if (ip.size() < 40) return std::nullopt;
    const std::size_t payload_len = be16(ip, 4);
    if (40 + payload_len > ip.size()) return std::nullopt;
    std::uint8_t next = ip[6];
    std::size_t off = 40;
    while (next == 0 || next == 43 || next == 60) {
      if (off + 8 > 40 + payload_len) return std::nullopt;
      next = ip[off];
      off += (static_cast<std::size_t>(ip[off + 1]) + 1) * 8;
    }
    if (next != 6 || off > 40 + payload_len) return std::nullopt;
    return parse_tcp(ip.subspan(off, 40 + payload_len - off), ip_text(AF_INET6, &ip[8]), ip_text(AF_INET6, &ip[24]));
  }
  return std::nullopt;
}

std::optional<TcpPacket> parse_link(std::uint32_t link, std::span<const std::uint8_t> pkt) {
  switch (link) {
    case kLinkEthernet: {
      std::size_t off = 12;
      if (pkt.size() < off + 2) return std::nullopt;
      std::uint16_t type = be16(pkt, off);
      while (type == 0x8100 || type == 0x88a8) {
        off += 4;
        if (pkt.size() < off + 2) return std::nullopt;
        type = be16(pkt, off);
      }
      if (type != 0x0800 && type != 0x86dd) return std::nullopt;
      return parse_ip(pkt.subspan(off + 2));
    }
    case kLinkRaw:
      return parse_ip(pkt);
    case kLinkLinuxSll:
      if (pkt.size() < 16) return std::nullopt;
      return parse_ip(pkt.subspan(16));
    case kLinkNull:
      if (pkt.size() < 4) return std::nullopt;
      return parse_ip(pkt.subspan(4));
    default:
      return std::nullopt;
  }
}

// One direction of one TCP connection.
struct Flow {
  bool started = false;
  std::uint32_t next_seq = 0;
  std::map<std::uint32_t, Bytes> pending;  // out-of-order segments by seq
  Bytes buffer;
};

void feed(Flow& f, const TcpPacket& p) {
  if (p.syn) {
    f.started = true;
    f.next_seq = p.seq + 1;
    f.pending.clear();
    f.buffer.clear();
    return;
  }
  if (p.payload.empty()) return;
  if (!f.started) {
    f.started = true;
    f.next_seq = p.seq;
  }
  const auto rel = static_cast<std::int32_t>(p.seq - f.next_seq);
  if (rel + static_cast<std::int64_t>(p.payload.size()) <= 0) return;  // retransmission
  if (rel <= 0) {
    f.buffer.insert(f.buffer.end(), p.payload.begin() + (-rel), p.payload.end());
    f.next_seq += static_cast<std::uint32_t>(p.payload.size() - static_cast<std::size_t>(-rel));
  } else {
    f.pending.emplace(p.seq, Bytes(p.payload.begin(), p.payload.end()));
  }
  for (bool progressed = true; progressed && !f.pending.empty();) {
    progressed = false;
    for (auto it = f.pending.begin(); it != f.pending.end(); ++it) {
      const auto r = static_cast<std::int32_t>(it->first - f.next_seq);
      if (r > 0) continue;
      if (r + static_cast<std::int64_t>(it->second.size()) > 0) {
        f.buffer.insert(f.buffer.end(), it->second.begin() + (-r), it->second.end());
        f.next_seq += static_cast<std::uint32_t>(it->second.size() - static_cast<std::size_t>(-r));
      }
      f.pending.erase(it);
      progressed = true;
      break;
    }
  }
}

void drain(Flow& f, Protocol protocol, const std::string& stream, bool is_request,
           std::chrono::system_clock::time_point ts, std::vector<CaptureRecord>& out) {
  for (;;) {
    const auto size = frame_size(protocol, f.buffer);
    if (!size) return;
    if (*size < kMinFrame || *size > kMaxFrame) {
      f.buffer.clear();  // lost sync; wait for the next segment boundary
      return;
    }
    if (f.buffer.size() < *size) return;
    CaptureRecord r;
    r.ts = ts;
    r.stream = stream;
    r.is_request = is_request;
    r.bytes.assign(f.buffer.begin(), f.buffer.begin() + static_cast<std::ptrdiff_t>(*size));
    f.buffer.erase(f.buffer.begin(), f.buffer.begin() + static_cast<std::ptrdiff_t>(*size));
    out.push_back(std::move(r));
  }
}

std::uint16_t ip_checksum(std::span<const std::uint8_t> data, std::uint32_t sum = 0) {
  for (std::size_t i = 0; i + 1 < data.size(); i += 2) sum += static_cast<std::uint32_t>((data[i] << 8) | data[i + 1]);
  if (data.size() % 2) sum += static_cast<std::uint32_t>(data.back() << 8);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

void put16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}
void put32(Bytes& b, std::uint32_t v) {
  put16(b, static_cast<std::uint16_t>(v >> 16));
  put16(b, static_cast<std::uint16_t>(v));
}
void put32le(Bytes& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::array<std::uint8_t, 4> ipv4(const std::string& text) {
  std::array<std::uint8_t, 4> a{};
  if (::inet_pton(AF_INET, text.c_str(), a.data()) != 1) throw Error(Errc::kInvalidConfig, "ip", "not IPv4: " + text);
  return a;
}

}  // namespace

std::vector<CaptureRecord> parse_pcap(std::span<const std::uint8_t> file, Protocol protocol, std::uint16_t port) {
  if (file.size() < 24) throw Error(Errc::kBadPcap, "header", "file shorter than a pcap global header");
  bool swapped = false;
  bool nanos = false;
  const std::uint32_t magic = le32(file, 0);
  if (magic == kMagicMicro || magic == kMagicNano) {
    nanos = magic == kMagicNano;
  } else if (be32(file, 0) == kMagicMicro || be32(file, 0) == kMagicNano) {
    swapped = true;
    nanos = be32(file, 0) == kMagicNano;
  } else {
    throw Error(Errc::kBadPcap, "magic", "not a classic pcap file");
  }
  const auto rd32 = [&](std::size_t o) { return swapped ? be32(file, o) : le32(file, o); };
  const std::uint32_t link = rd32(20) & 0x0fffffff;

  std::map<std::string, Flow> flows;
  std::vector<CaptureRecord> out;
  std::size_t off = 24;
  while (off + 16 <= file.size()) {
    const std::uint32_t sec = rd32(off);
    const std::uint32_t frac = rd32(off + 4);
    const std::uint32_t incl = rd32(off + 8);
    off += 16;
    if (incl > file.size() - off) break;  // truncated final record
    const auto pkt = file.subspan(off, incl);
    off += incl;
    const auto tcp = parse_link(link, pkt);
    if (!tcp) continue;
    const bool is_request = tcp->dport == port;
    if (!is_request && tcp->sport != port) continue;
    const std::string client = is_request ? tcp->src + ":" + std::to_string(tcp->sport)
                                          : tcp->dst + ":" + std::to_string(tcp->dport);
    const std::string server = is_request ? tcp->dst : tcp->src;
    const std::string stream = client + "-" + server + ":" + std::to_string(port);
    const auto ts = std::chrono::system_clock::time_point(
        std::chrono::seconds(sec) +
        std::chrono::duration_cast<std::chrono::system_clock::duration>(
            nanos ? std::chrono::nanoseconds(frac) : std::chrono::nanoseconds(std::uint64_t{frac} * 1000)));
    auto& flow = flows[stream + (is_request ? ">" : "<")];
    feed(flow, *tcp);
    drain(flow, protocol, stream, is_request, ts, out);
  }
  if (out.empty())
    throw Error(Errc::kNoMatchingTraffic, "port",
                "no " + std::string(protocol_name(protocol)) + " frames on port " + std::to_string(port));
  return out;
}

std::vector<CaptureRecord> parse_capture_log(std::string_view text) {
  std::vector<CaptureRecord> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kBadPcap, "line " + std::to_string(line_no), e.what());
    }
    const std::string dir = j.value("dir", "");
    if (dir != "in" && dir != "out") continue;
    CaptureRecord r;
    r.is_request = dir == "in";
    r.stream = j.value("peer", "");
    r.bytes = from_hex(j.value("hex", ""));
    if (auto ts = parse_iso_timestamp(j.value("ts", ""))) r.ts = *ts;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CaptureRecord> read_capture(const std::string& path, Protocol protocol, std::uint16_t port) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::kIo, path, "cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string data = ss.str();
  const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size());
  if (bytes.size() >= 4) {
    const std::uint32_t m = le32(bytes, 0);
    const std::uint32_t mb = be32(bytes, 0);
    if (m == kMagicMicro || m == kMagicNano || mb == kMagicMicro || mb == kMagicNano)
      return parse_pcap(bytes, protocol, port);
  }
  auto records = parse_capture_log(data);
  if (records.empty()) throw Error(Errc::kNoMatchingTraffic, path, "capture log has no in/out records");
  return records;
}

Bytes build_pcap(const std::vector<WireSegment>& segments) {
  Bytes out;
  put32le(out, kMagicMicro);
  out.push_back(2);
  out.push_back(0);
  out.push_back(4);
  out.push_back(0);
  put32le(out, 0);
  put32le(out, 0);
  put32le(out, 65535);
  put32le(out, kLinkEthernet);

  std::map<std::string, std::uint32_t> seqs;
  for (const auto& s : segments) {
    const auto src = ipv4(s.src_ip);
    const auto dst = ipv4(s.dst_ip);
    const std::string dir = s.src_ip + ":" + std::to_string(s.src_port) + ">" + s.dst_ip + ":" + std::to_string(s.dst_port);
    auto [it, fresh] = seqs.try_emplace(dir, 1000u);
    const std::uint32_t seq = it->second;
    it->second += static_cast<std::uint32_t>(s.payload.size());
    const std::string rev = s.dst_ip + ":" + std::to_string(s.dst_port) + ">" + s.src_ip + ":" + std::to_string(s.src_port);
    const std::uint32_t ack = seqs.try_emplace(rev, 1000u).first->second;

    Bytes tcp;
    put16(tcp, s.src_port);
    put16(tcp, s.dst_port);
    put32(tcp, seq);
    put32(tcp, ack);
    tcp.push_back(0x50);
    tcp.push_back(0x18);  // PSH|ACK
    put16(tcp, 65535);
    put16(tcp, 0);
    put16(tcp, 0);
    tcp.insert(tcp.end(), s.payload.begin(), s.payload.end());
    std::uint32_t pseudo = 0;
    pseudo += static_cast<std::uint32_t>((src[0] << 8) | src[1]) + static_cast<std::uint32_t>((src[2] << 8) | src[3]);
    pseudo += static_cast<std::uint32_t>((dst[0] << 8) | dst[1]) + static_cast<std::uint32_t>((dst[2] << 8) | dst[3]);
    pseudo += 6 + static_cast<std::uint32_t>(tcp.size());
    const std::uint16_t tcsum = ip_checksum(tcp, pseudo);
    tcp[16] = static_cast<std::uint8_t>(tcsum >> 8);
    tcp[17] = static_cast<std::uint8_t>(tcsum);

    Bytes ip;
    ip.push_back(0x45);
    ip.push_back(0);
    put16(ip, static_cast<std::uint16_t>(20 + tcp.size()));
    put16(ip, 0);
    put16(ip, 0x4000);
    ip.push_back(64);
    ip.push_back(6);
    put16(ip, 0);
    ip.insert(ip.end(), src.begin(), src.end());
    ip.insert(ip.end(), dst.begin(), dst.end());
    const std::uint16_t icsum = ip_checksum(ip);
    ip[10] = static_cast<std::uint8_t>(icsum >> 8);
    ip[11] = static_cast<std::uint8_t>(icsum);

    Bytes frame{0x02, 0, 0, 0, 0, 0x02, 0x02, 0, 0, 0, 0, 0x01, 0x08, 0x00};
    frame.insert(frame.end(), ip.begin(), ip.end());
    frame.insert(frame.end(), tcp.begin(), tcp.end());

    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(s.ts.time_since_epoch()).count();
    put32le(out, static_cast<std::uint32_t>(us / 1000000));
    put32le(out, static_cast<std::uint32_t>(us % 1000000));
    put32le(out, static_cast<std::uint32_t>(frame.size()));
    put32le(out, static_cast<std::uint32_t>(frame.size()));
    out.insert(out.end(), frame.begin(), frame.end());
  }
  return out;
}

void write_pcap(const std::string& path, const std::vector<WireSegment>& segments) {
  const Bytes data = build_pcap(segments);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::kIo, path, "cannot open for writing");
  f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!f) throw Error(Errc::kIo, path, "write failed");
}

}  // namespace plcmimic
