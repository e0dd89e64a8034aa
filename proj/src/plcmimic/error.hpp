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

#include <stdexcept>
#include <string>
#include <string_view>

namespace plcmimic {

enum class Errc {
  kBadHex,
  kTruncated,
  kBadProtocolId,
  kUnknownFunction,
  kLengthMismatch,
  kInvalidPdu,
  kInvalidRequest,
  kInvalidItem,
  kInvalidConfig,
  kUndecodableRequest,
  kBindError,
  kProbeTimeout,
  kConnectionLost,
  kEmptyRange,
  kDegenerateDensity,
  kBadPcap,
  kNoMatchingTraffic,
  kInsufficientHistory,
  kTrainerUnavailable,
  kBadRequest,
  kResponderTimeout,
  kIo,
};

std::string_view errc_name(Errc code);

// Every failure raised by the library. `field()` names the frame field,
// protocol layer, or config key that failed when there is one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string field, const std::string& detail = {});

  Errc code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Errc code_;
  std::string field_;
};

}  // namespace plcmimic
