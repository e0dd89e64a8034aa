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

// Capture input: classic pcap files (with TCP reassembly) and JSONL capture
// logs. Capture output: synthetic Ethernet/IPv4/TCP pcap.

#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plcmimic/config.hpp"
#include "plcmimic/dataset.hpp"
#include "plcmimic/hex.hpp"

namespace plcmimic {

/// Frames of `protocol` exchanged with server port `port`, in completion
/// order. Throws Error(kBadPcap) on an unreadable file and
/// Error(kNoMatchingTraffic) when nothing matches.
std::vector<CaptureRecord> parse_pcap(std::span<const std::uint8_t> file, Protocol protocol, std::uint16_t port);

/// Records of a JSONL capture log ({ts, peer, dir, hex}); "in" lines are
/// requests, "out" lines responses, anything else is skipped.
std::vector<CaptureRecord> parse_capture_log(std::string_view text);

/// Dispatches on content: pcap magic or JSONL.
std::vector<CaptureRecord> read_capture(const std::string& path, Protocol protocol, std::uint16_t port);

/// One TCP payload to synthesize.
struct WireSegment {
  std::chrono::system_clock::time_point ts;
  std::string src_ip;  // dotted IPv4
  std::uint16_t src_port = 0;
  std::string dst_ip;
  std::uint16_t dst_port = 0;
  Bytes payload;
};

/// Ethernet/IPv4/TCP packets, one per segment, with per-direction sequence
/// numbers and valid checksums.
Bytes build_pcap(const std::vector<WireSegment>& segments);
void write_pcap(const std::string& path, const std::vector<WireSegment>& segments);

}  // namespace plcmimic
