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

// Request/response pairs: capture pairing, CSV, context windows, splits.

#pragma once

#include <array>
#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "plcmimic/config.hpp"
#include "plcmimic/hex.hpp"
#include "plcmimic/rng.hpp"

namespace plcmimic {

struct SamplePair {
  std::string source_text;  // request hex, or a framed context window
  std::string target_text;  // response hex

  bool operator==(const SamplePair&) const = default;
};

/// One application-layer frame seen on the wire.
struct CaptureRecord {
  std::chrono::system_clock::time_point ts;
  std::string stream;  // connection id, identical for both directions
  bool is_request = true;
  Bytes bytes;
};

struct PairingResult {
  std::vector<SamplePair> pairs;  // ordered by request arrival
  std::vector<CaptureRecord> orphans;
  std::size_t ignored = 0;  // S7 connection setup frames
};

/// Modbus frames pair on (stream, transaction id, unit id), S7 on
/// (stream, pdu_ref); duplicates of a key pair first-in first-out.
PairingResult pair_transactions(Protocol protocol, const std::vector<CaptureRecord>& records);

std::string to_csv(const std::vector<SamplePair>& pairs);
/// Throws Error(kIo) on a bad header or row.
std::vector<SamplePair> parse_csv(std::string_view text);
void write_csv(const std::string& path, const std::vector<SamplePair>& pairs);
std::vector<SamplePair> read_csv(const std::string& path);

/// Window i holds the `history_len` pairs before pair i and the query of
/// pair i: "q1:r1|q2:r2|...|q:". Throws Error(kInsufficientHistory) when
/// there are fewer than history_len + 1 pairs.
std::vector<SamplePair> build_context(const std::vector<SamplePair>& pairs, std::size_t history_len);

struct ContextView {
  std::vector<SamplePair> history;
  std::string query;
};

/// Inverse of the window framing. Throws Error(kBadRequest) on bad framing.
ContextView unframe(std::string_view source_text);

struct DatasetSplit {
  std::vector<SamplePair> train, val, test;
};

/// Shuffles, then takes floor(n * ratio) for validation and test; training
/// gets the remainder.
DatasetSplit split_dataset(std::vector<SamplePair> pairs, const std::array<double, 3>& ratios, Rng& rng);

}  // namespace plcmimic
