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

// Emulator scoring: byte-exact accuracy (BCA), protocol validity (RVA) and
// validity with value tolerance (RVA-eps).

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plcmimic/config.hpp"
#include "plcmimic/dataset.hpp"
#include "plcmimic/protocol.hpp"
#include "plcmimic/responder.hpp"

namespace plcmimic {

/// Canonical-hex equality; a prediction that is not hex never matches.
bool bca(std::string_view predicted, std::string_view reference);

struct RvaResult {
  bool valid = false;
  std::string reason;  // first failed check, empty when valid
};

/// Whether `predicted` is a response a device configured by `cfg` could
/// legitimately send to `request_hex`.
RvaResult rva(const ProtocolConfig& cfg, std::string_view request_hex, std::string_view predicted);

/// Structural view of a response, used to compare values.
struct ResponseView {
  OutcomeType type = OutcomeType::kValues;
  std::uint8_t exception = 0;
  DataKind kind = DataKind::kAnalog;
  std::vector<std::uint16_t> values;
};

/// Throws Error when the response does not decode.
ResponseView view_response(Protocol protocol, const Request& request, std::string_view response_hex);

/// RVA plus: same response type as the reference, analog values within
/// +-eps counts, digital values equal.
bool rva_eps(const ProtocolConfig& cfg, std::string_view request_hex, std::string_view predicted,
             std::string_view reference, std::uint32_t eps);

struct MetricReport {
  std::size_t n = 0;
  double bca = 0.0;
  double rva = 0.0;
  std::map<std::uint32_t, double> rva_eps;
  std::map<std::string, std::size_t> failures;  // RVA failure reason tallies
  std::size_t responder_errors = 0;

  std::string to_json() const;
  std::string curve_csv() const;
};

/// Scores one prediction per record. The query is the bare source_text or
/// the last element of a context window.
MetricReport score(const ProtocolConfig& cfg, const std::vector<SamplePair>& records,
                   const std::vector<std::string>& predictions, const std::vector<std::uint32_t>& eps_list);

/// Queries `responder` for every record, then scores.
MetricReport evaluate(const ProtocolConfig& cfg, const std::vector<SamplePair>& records, Responder& responder,
                      const std::vector<std::uint32_t>& eps_list,
                      std::chrono::milliseconds budget = std::chrono::seconds(10));

/// Query hex of a record's source_text.
std::string query_of(const std::string& source_text);

}  // namespace plcmimic
