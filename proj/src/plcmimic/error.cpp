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

#include "plcmimic/error.hpp"

namespace plcmimic {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kBadHex: return "BadHex";
    case Errc::kTruncated: return "Truncated";
    case Errc::kBadProtocolId: return "BadProtocolId";
    case Errc::kUnknownFunction: return "UnknownFunction";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kInvalidPdu: return "InvalidPdu";
    case Errc::kInvalidRequest: return "InvalidRequest";
    case Errc::kInvalidItem: return "InvalidItem";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kUndecodableRequest: return "UndecodableRequest";
    case Errc::kBindError: return "BindError";
    case Errc::kProbeTimeout: return "ProbeTimeout";
    case Errc::kConnectionLost: return "ConnectionLost";
    case Errc::kEmptyRange: return "EmptyRange";
    case Errc::kDegenerateDensity: return "DegenerateDensity";
    case Errc::kBadPcap: return "BadPcap";
    case Errc::kNoMatchingTraffic: return "NoMatchingTraffic";
    case Errc::kInsufficientHistory: return "InsufficientHistory";
    case Errc::kTrainerUnavailable: return "TrainerUnavailable";
    case Errc::kBadRequest: return "BadRequest";
    case Errc::kResponderTimeout: return "ResponderTimeout";
    case Errc::kIo: return "Io";
  }
  return "Unknown";
}

namespace {

std::string compose(Errc code, const std::string& field, const std::string& detail) {
  std::string msg(errc_name(code));
  if (!field.empty()) msg += "(" + field + ")";
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

Error::Error(Errc code, std::string field, const std::string& detail)
    : std::runtime_error(compose(code, field, detail)), code_(code), field_(std::move(field)) {}

}  // namespace plcmimic
