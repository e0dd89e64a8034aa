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

// Modbus/TCP application data units for the read/write function set
// {1, 3, 5, 6, 15, 16} and their exception responses.
//
// Bit packing follows the Modbus convention: coil N of a request lands in
// bit (N % 8) of byte (N / 8), and unused high bits of the final byte are
// zero. Response comparison (BCA) depends on that padding being canonical.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "plcmimic/hex.hpp"

namespace plcmimic::modbus {

inline constexpr std::uint8_t kReadCoils = 0x01;
inline constexpr std::uint8_t kReadHoldingRegisters = 0x03;
inline constexpr std::uint8_t kWriteSingleCoil = 0x05;
inline constexpr std::uint8_t kWriteSingleRegister = 0x06;
inline constexpr std::uint8_t kWriteMultipleCoils = 0x0f;
inline constexpr std::uint8_t kWriteMultipleRegisters = 0x10;
inline constexpr std::uint8_t kExceptionFlag = 0x80;

inline constexpr std::uint8_t kIllegalFunction = 0x01;
inline constexpr std::uint8_t kIllegalDataAddress = 0x02;
inline constexpr std::uint8_t kIllegalDataValue = 0x03;
inline constexpr std::uint8_t kServerDeviceFailure = 0x04;

inline constexpr std::uint16_t kCoilOn = 0xff00;
inline constexpr std::uint16_t kCoilOff = 0x0000;

inline constexpr std::size_t kMbapSize = 7;
inline constexpr std::size_t kMaxPduSize = 253;

// Protocol quantity limits per request.
inline constexpr std::uint16_t kMaxReadCoils = 2000;
inline constexpr std::uint16_t kMaxReadRegisters = 125;
inline constexpr std::uint16_t kMaxWriteCoils = 1968;
inline constexpr std::uint16_t kMaxWriteRegisters = 123;

bool is_supported_function(std::uint8_t function_code) noexcept;
bool is_digital_function(std::uint8_t function_code) noexcept;

struct MbapHeader {
  std::uint16_t transaction_id = 0;
  std::uint16_t protocol_id = 0;
  std::uint16_t length = 0;  // unit id + PDU bytes
  std::uint8_t unit_id = 0;

  bool operator==(const MbapHeader&) const = default;
};

struct ReadRequest {
  std::uint16_t address = 0;
  std::uint16_t quantity = 0;
  bool operator==(const ReadRequest&) const = default;
};

struct WriteSingle {
  std::uint16_t address = 0;
  std::uint16_t value = 0;
  bool operator==(const WriteSingle&) const = default;
};

struct WriteMultiple {
  std::uint16_t address = 0;
  std::uint16_t quantity = 0;
  std::uint8_t byte_count = 0;
  Bytes values;
  bool operator==(const WriteMultiple&) const = default;
};

struct ReadResponse {
  std::uint8_t byte_count = 0;
  Bytes values;
  bool operator==(const ReadResponse&) const = default;
};

struct WriteAck {
  std::uint16_t address = 0;
  std::uint16_t quantity_or_value = 0;
  bool operator==(const WriteAck&) const = default;
};

struct ExceptionBody {
  std::uint8_t exception_code = 0;
  bool operator==(const ExceptionBody&) const = default;
};

using PduBody = std::variant<ReadRequest, WriteSingle, WriteMultiple, ReadResponse, WriteAck, ExceptionBody>;

struct Pdu {
  std::uint8_t function_code = 0;
  PduBody body;
  bool operator==(const Pdu&) const = default;
};

enum class Direction { kRequest, kResponse };

struct Frame {
  std::string hex;
  MbapHeader header;
  Pdu pdu;

  Bytes bytes() const { return from_hex(hex); }
  bool is_exception() const noexcept { return (pdu.function_code & kExceptionFlag) != 0; }
};

/// Builds the frame, recomputing the MBAP length. protocol_id is forced to 0.
/// Throws Error(kInvalidPdu) when the body does not fit the function code or
/// quantity and byte_count disagree, Error(kUnknownFunction) for codes outside
/// the supported set.
Frame encode(const MbapHeader& header, const Pdu& pdu);

/// Request and response bodies for fc 1/3 are only distinguishable by
/// direction, so the caller says which one it expects.
Frame decode(std::span<const std::uint8_t> adu, Direction direction);
Frame decode(std::string_view hex, Direction direction);

/// Exception response echoing the request's transaction and unit ids.
/// Throws Error(kInvalidRequest) for code 0.
Frame make_exception(const Frame& request, std::uint8_t exception_code);
/// Same, from raw hex. Works for function codes outside the supported set as
/// long as the MBAP header is intact.
Frame make_exception(std::string_view request_hex, std::uint8_t exception_code);

/// Total ADU size announced by the MBAP header at the start of `stream`, or
/// nullopt when fewer than 6 bytes are buffered.
std::optional<std::size_t> announced_size(std::span<const std::uint8_t> stream) noexcept;

/// MBAP header and raw function code of a structurally complete ADU, without
/// interpreting the body. nullopt if the header is short or inconsistent.
struct RawAdu {
  MbapHeader header;
  std::uint8_t function_code = 0;
  std::span<const std::uint8_t> body;
};
std::optional<RawAdu> split_adu(std::span<const std::uint8_t> adu) noexcept;

Bytes pack_bits(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> packed, std::size_t count);
Bytes pack_words(std::span<const std::uint16_t> words);
std::vector<std::uint16_t> unpack_words(std::span<const std::uint8_t> packed);

}  // namespace plcmimic::modbus
