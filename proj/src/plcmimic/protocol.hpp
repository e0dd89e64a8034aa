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

// Protocol-neutral view of the read/write surface. Both protocols are
// described with Modbus function numbering:
//
//   1  read digital      5  write one digital     15 write many digital
//   3  read analog       6  write one analog      16 write many analog
//
// On S7 the digital points are bits of data block 1 (one BIT item per point)
// and the analog points are words of data block 2 (a single WORD item).

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "plcmimic/config.hpp"
#include "plcmimic/hex.hpp"

namespace plcmimic {

inline constexpr std::uint16_t kDigitalDb = 1;
inline constexpr std::uint16_t kAnalogDb = 2;

// Protocol-neutral exception classes. Modbus uses them as exception codes.
inline constexpr std::uint8_t kExcIllegalFunction = 0x01;
inline constexpr std::uint8_t kExcIllegalAddress = 0x02;
inline constexpr std::uint8_t kExcIllegalValue = 0x03;
inline constexpr std::uint8_t kExcDeviceFailure = 0x04;

// S7 renderings of the exception classes.
inline constexpr std::uint8_t kS7FunctionErrorClass = 0x81;
inline constexpr std::uint8_t kS7FunctionErrorCode = 0x04;
inline constexpr std::uint8_t kS7FailureErrorClass = 0x83;
inline constexpr std::uint8_t kS7FailureErrorCode = 0x04;

enum class Access { kRead, kWrite };

/// Read/write operation to be turned into a request frame.
struct Operation {
  Access access = Access::kRead;
  DataKind kind = DataKind::kAnalog;
  std::uint32_t address = 0;
  std::uint16_t count = 1;             // reads
  std::vector<std::uint16_t> values;   // writes; digital values are 0/1
  bool force_multiple = false;         // use fc 15/16 even for one element
};

std::uint8_t function_for(const Operation& op);

/// Decoded request, whatever the wire protocol.
struct Request {
  Protocol protocol = Protocol::kModbus;
  std::uint16_t id = 0;       // transaction id / pdu_ref
  std::uint8_t unit_id = 0;   // Modbus only
  std::uint8_t function = 0;  // Modbus numbering; raw code when unsupported
  bool supported = true;      // false: function (or S7 item layout) outside the surface
  bool mapped = true;         // S7: items address our data blocks
  Access access = Access::kRead;
  DataKind kind = DataKind::kAnalog;
  std::uint32_t address = 0;
  std::uint16_t count = 0;
  std::vector<std::uint16_t> values;
  bool value_encoding_ok = true;  // Modbus fc 5 accepts only 0x0000 / 0xff00
  bool malformed = false;         // framing intact but body inconsistent
  std::size_t item_count = 0;     // S7 parameter items
};

enum class OutcomeType { kValues, kWriteOk, kException };

struct Outcome {
  OutcomeType type = OutcomeType::kValues;
  std::uint8_t exception = 0;
  std::vector<std::uint16_t> values;
};

Bytes build_request(Protocol protocol, std::uint16_t id, std::uint8_t unit_id, const Operation& op);

/// Throws Error when the frame cannot be interpreted at all (bad framing).
/// Unsupported functions with intact framing come back with supported=false.
Request parse_request(Protocol protocol, std::span<const std::uint8_t> frame);

Bytes build_response(const Request& request, const Outcome& outcome);

/// Exception class the configuration mandates for this request, or nullopt
/// when the request must succeed. Checked in Modbus order: function,
/// quantity, address, value.
std::optional<std::uint8_t> mandated_exception(const ProtocolConfig& cfg, const Request& request);

/// S7 item return code rendering exception class `exception`.
std::uint8_t s7_item_return_code(const Request& request, std::uint8_t exception);

/// Length of the frame at the head of a byte stream, from the protocol's
/// length field. nullopt until enough header bytes are buffered.
std::optional<std::size_t> frame_size(Protocol protocol, std::span<const std::uint8_t> stream) noexcept;

}  // namespace plcmimic
