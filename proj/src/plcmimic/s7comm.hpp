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

// Reduced S7Comm over ISO-on-TCP: TPKT + COTP data TPDU + S7 header,
// parameter and data sections for read-var / write-var jobs and their
// ack_data replies. Connection setup (COTP CR/CC and setup-communication) is
// handled by the scripted handshake helpers at the bottom.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plcmimic/hex.hpp"

namespace plcmimic::s7 {

inline constexpr std::uint8_t kTpktVersion = 0x03;
inline constexpr std::uint8_t kProtocolId = 0x32;
inline constexpr std::uint8_t kJob = 0x01;
inline constexpr std::uint8_t kAckData = 0x03;

inline constexpr std::uint8_t kReadVar = 0x04;
inline constexpr std::uint8_t kWriteVar = 0x05;
inline constexpr std::uint8_t kSetupCommunication = 0xf0;

inline constexpr std::uint8_t kAreaDataBlock = 0x84;

// Transport sizes used in item specifications.
inline constexpr std::uint8_t kItemBit = 0x01;
inline constexpr std::uint8_t kItemByte = 0x02;
inline constexpr std::uint8_t kItemWord = 0x04;

// Transport sizes used in data items.
inline constexpr std::uint8_t kDataNull = 0x00;
inline constexpr std::uint8_t kDataBit = 0x03;
inline constexpr std::uint8_t kDataByteWord = 0x04;
inline constexpr std::uint8_t kDataOctets = 0x09;

// Item return codes.
inline constexpr std::uint8_t kReturnReserved = 0x00;
inline constexpr std::uint8_t kReturnHardwareFault = 0x01;
inline constexpr std::uint8_t kReturnAccessDenied = 0x03;
inline constexpr std::uint8_t kReturnAddressOutOfRange = 0x05;
inline constexpr std::uint8_t kReturnDataTypeNotSupported = 0x06;
inline constexpr std::uint8_t kReturnDataTypeInconsistent = 0x07;
inline constexpr std::uint8_t kReturnObjectDoesNotExist = 0x0a;
inline constexpr std::uint8_t kReturnSuccess = 0xff;

inline constexpr std::size_t kTpktSize = 4;
inline constexpr std::size_t kCotpDataSize = 3;

struct Item {
  std::uint8_t transport_size = kItemWord;
  std::uint16_t count = 1;
  std::uint16_t db_number = 0;
  std::uint8_t area = kAreaDataBlock;
  std::uint32_t address = 0;  // 24-bit: byte offset << 3 | bit offset

  bool operator==(const Item&) const = default;
};

struct DataItem {
  std::uint8_t return_code = kReturnSuccess;
  std::uint8_t transport_size = kDataByteWord;
  Bytes data;

  bool operator==(const DataItem&) const = default;
};

struct Frame {
  std::uint8_t pdu_type = kJob;
  std::uint16_t pdu_ref = 0;
  std::uint8_t error_class = 0;  // ack_data only
  std::uint8_t error_code = 0;   // ack_data only
  std::uint8_t function = kReadVar;
  std::vector<Item> items;            // job parameter
  std::vector<DataItem> data;         // write job payload, read ack payload
  std::vector<std::uint8_t> results;  // write ack return codes

  bool operator==(const Frame&) const = default;

  bool is_job() const noexcept { return pdu_type == kJob; }
  bool is_error() const noexcept { return pdu_type == kAckData && (error_class != 0 || error_code != 0); }
};

/// Serializes the frame and recomputes TPKT, parameter and data lengths.
/// Throws Error(kInvalidItem) on malformed item lists.
Bytes encode_bytes(const Frame& frame);
std::string encode(const Frame& frame);

/// Errors carry the failing layer ("TPKT", "COTP", "S7") as their field.
Frame decode(std::span<const std::uint8_t> tpdu);
Frame decode(std::string_view hex);

/// TPKT-announced size of the frame at the start of `stream`.
std::optional<std::size_t> announced_size(std::span<const std::uint8_t> stream) noexcept;

/// Error-class ack_data reply to a job (protocol-level failure, no items).
Frame make_error_ack(const Frame& job, std::uint8_t error_class, std::uint8_t error_code);

// --- scripted connection setup -------------------------------------------

bool is_connect_request(std::span<const std::uint8_t> tpdu) noexcept;
bool is_setup_request(std::span<const std::uint8_t> tpdu) noexcept;
/// Handshake frames are answered by script, never by a responder.
bool is_handshake(std::span<const std::uint8_t> tpdu) noexcept;
/// Connect confirm or setup-communication ack.
bool is_handshake_reply(std::span<const std::uint8_t> tpdu) noexcept;

Bytes connect_request(std::uint16_t source_ref = 0x0001);
Bytes connect_confirm(std::span<const std::uint8_t> request);
Bytes setup_request(std::uint16_t pdu_ref, std::uint16_t pdu_length = 480);
Bytes setup_response(std::span<const std::uint8_t> request);

}  // namespace plcmimic::s7
