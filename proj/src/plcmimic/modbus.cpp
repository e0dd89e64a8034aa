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

#include "plcmimic/modbus.hpp"

#include "plcmimic/error.hpp"

namespace plcmimic::modbus {

namespace {

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

std::uint16_t get16(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint16_t>(in[at] << 8 | in[at + 1]);
}

std::size_t expected_byte_count(std::uint8_t function_code, std::uint16_t quantity) {
  return is_digital_function(function_code) ? (quantity + 7u) / 8u : 2u * quantity;
}

[[noreturn]] void invalid(const char* field, const std::string& detail = {}) {
  throw Error(Errc::kInvalidPdu, field, detail);
}

void check_body(std::uint8_t fc, const PduBody& body) {
  const std::uint8_t base = fc & ~kExceptionFlag;
  if (!is_supported_function(base)) throw Error(Errc::kUnknownFunction, "function_code", std::to_string(fc));

  if (fc & kExceptionFlag) {
    const auto* e = std::get_if<ExceptionBody>(&body);
    if (e == nullptr) invalid("body", "exception function code needs an exception body");
    if (e->exception_code == 0) invalid("exception_code", "exception codes start at 1");
    return;
  }

  std::visit(
      [fc](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, ReadRequest>) {
          if (fc != kReadCoils && fc != kReadHoldingRegisters) invalid("body", "read request on a write function");
          if (b.quantity == 0) invalid("quantity", "must be >= 1");
        } else if constexpr (std::is_same_v<T, WriteSingle>) {
          if (fc != kWriteSingleCoil && fc != kWriteSingleRegister) invalid("body", "single write on wrong function");
        } else if constexpr (std::is_same_v<T, WriteMultiple>) {
          if (fc != kWriteMultipleCoils && fc != kWriteMultipleRegisters)
            invalid("body", "multiple write on wrong function");
          if (b.quantity == 0) invalid("quantity", "must be >= 1");
          if (b.byte_count != b.values.size()) invalid("byte_count", "does not match value bytes");
          if (b.byte_count != expected_byte_count(fc, b.quantity)) invalid("byte_count", "inconsistent with quantity");
        } else if constexpr (std::is_same_v<T, ReadResponse>) {
          if (fc != kReadCoils && fc != kReadHoldingRegisters) invalid("body", "read response on a write function");
          if (b.byte_count != b.values.size()) invalid("byte_count", "does not match value bytes");
          if (fc == kReadHoldingRegisters && b.byte_count % 2 != 0) invalid("byte_count", "odd register byte count");
        } else if constexpr (std::is_same_v<T, WriteAck>) {
          if (fc == kReadCoils || fc == kReadHoldingRegisters) invalid("body", "write ack on a read function");
          if ((fc == kWriteMultipleCoils || fc == kWriteMultipleRegisters) && b.quantity_or_value == 0)
            invalid("quantity", "must be >= 1");
        } else {
          invalid("body", "exception body without exception flag");
        }
      },
      body);
}

Bytes serialize_body(const PduBody& body) {
  Bytes out;
  std::visit(
      [&out](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, ReadRequest>) {
          put16(out, b.address);
          put16(out, b.quantity);
        } else if constexpr (std::is_same_v<T, WriteSingle>) {
          put16(out, b.address);
          put16(out, b.value);
        } else if constexpr (std::is_same_v<T, WriteMultiple>) {
          put16(out, b.address);
          put16(out, b.quantity);
          out.push_back(b.byte_count);
          out.insert(out.end(), b.values.begin(), b.values.end());
        } else if constexpr (std::is_same_v<T, ReadResponse>) {
          out.push_back(b.byte_count);
          out.insert(out.end(), b.values.begin(), b.values.end());
        } else if constexpr (std::is_same_v<T, WriteAck>) {
          put16(out, b.address);
          put16(out, b.quantity_or_value);
        } else {
          out.push_back(b.exception_code);
        }
      },
      body);
  return out;
}

}  // namespace

bool is_supported_function(std::uint8_t fc) noexcept {
  switch (fc) {
    case kReadCoils:
    case kReadHoldingRegisters:
    case kWriteSingleCoil:
    case kWriteSingleRegister:
    case kWriteMultipleCoils:
    case kWriteMultipleRegisters:
      return true;
    default:
      return false;
  }
}

bool is_digital_function(std::uint8_t fc) noexcept {
  fc &= ~kExceptionFlag;
  return fc == kReadCoils || fc == kWriteSingleCoil || fc == kWriteMultipleCoils;
}

Frame encode(const MbapHeader& header, const Pdu& pdu) {
  check_body(pdu.function_code, pdu.body);
  Bytes body = serialize_body(pdu.body);
  if (body.size() + 1 > kMaxPduSize) invalid("body", "PDU exceeds 253 bytes");

  Frame frame;
  frame.header = header;
  frame.header.protocol_id = 0;
  frame.header.length = static_cast<std::uint16_t>(2 + body.size());
  frame.pdu = pdu;

  Bytes adu;
  adu.reserve(kMbapSize + 1 + body.size());
  put16(adu, frame.header.transaction_id);
  put16(adu, 0);
  put16(adu, frame.header.length);
  adu.push_back(frame.header.unit_id);
  adu.push_back(pdu.function_code);
  adu.insert(adu.end(), body.begin(), body.end());
  frame.hex = to_hex(adu);
  return frame;
}

std::optional<std::size_t> announced_size(std::span<const std::uint8_t> stream) noexcept {
  if (stream.size() < 6) return std::nullopt;
  return 6u + get16(stream, 4);
}

std::optional<RawAdu> split_adu(std::span<const std::uint8_t> adu) noexcept {
  if (adu.size() < kMbapSize + 1) return std::nullopt;
  RawAdu raw;
  raw.header.transaction_id = get16(adu, 0);
  raw.header.protocol_id = get16(adu, 2);
  raw.header.length = get16(adu, 4);
  raw.header.unit_id = adu[6];
  if (raw.header.length < 2 || adu.size() != 6u + raw.header.length) return std::nullopt;
  raw.function_code = adu[7];
  raw.body = adu.subspan(8);
  return raw;
}

Frame decode(std::span<const std::uint8_t> adu, Direction direction) {
  if (adu.size() < kMbapSize) throw Error(Errc::kTruncated, "mbap", std::to_string(adu.size()) + " bytes");
  MbapHeader header{get16(adu, 0), get16(adu, 2), get16(adu, 4), adu[6]};
  if (header.protocol_id != 0) throw Error(Errc::kBadProtocolId, "protocol_id", std::to_string(header.protocol_id));
  if (header.length < 2) throw Error(Errc::kLengthMismatch, "length", "shorter than unit id + function code");
  const std::size_t total = 6u + header.length;
  if (adu.size() < total) throw Error(Errc::kTruncated, "pdu", "length field announces " + std::to_string(total));
  if (adu.size() > total) throw Error(Errc::kLengthMismatch, "length", "trailing bytes after declared length");

  const std::uint8_t fc = adu[7];
  const auto body = adu.subspan(8, header.length - 2);
  Pdu pdu{fc, {}};

  auto need = [&body](std::size_t n, const char* field) {
    if (body.size() != n) throw Error(Errc::kLengthMismatch, field, "body has " + std::to_string(body.size()) + " bytes");
  };

  if (fc & kExceptionFlag) {
    if (!is_supported_function(fc & ~kExceptionFlag))
      throw Error(Errc::kUnknownFunction, "function_code", std::to_string(fc));
    need(1, "exception_code");
    if (body[0] == 0) invalid("exception_code", "exception codes start at 1");
    pdu.body = ExceptionBody{body[0]};
  } else if (!is_supported_function(fc)) {
    throw Error(Errc::kUnknownFunction, "function_code", std::to_string(fc));
  } else if (direction == Direction::kRequest) {
    switch (fc) {
      case kReadCoils:
      case kReadHoldingRegisters:
        need(4, "pdu");
        pdu.body = ReadRequest{get16(body, 0), get16(body, 2)};
        break;
      case kWriteSingleCoil:
      case kWriteSingleRegister:
        need(4, "pdu");
        pdu.body = WriteSingle{get16(body, 0), get16(body, 2)};
        break;
      default: {
        if (body.size() < 5) throw Error(Errc::kLengthMismatch, "pdu", "multiple write shorter than 5 bytes");
        WriteMultiple w{get16(body, 0), get16(body, 2), body[4], {}};
        need(5u + w.byte_count, "byte_count");
        w.values.assign(body.begin() + 5, body.end());
        pdu.body = std::move(w);
        break;
      }
    }
  } else {
    switch (fc) {
      case kReadCoils:
      case kReadHoldingRegisters: {
        if (body.empty()) throw Error(Errc::kLengthMismatch, "byte_count", "missing");
        ReadResponse r{body[0], {}};
        need(1u + r.byte_count, "byte_count");
        r.values.assign(body.begin() + 1, body.end());
        pdu.body = std::move(r);
        break;
      }
      default:
        need(4, "pdu");
        pdu.body = WriteAck{get16(body, 0), get16(body, 2)};
        break;
    }
  }
  check_body(fc, pdu.body);
  return Frame{to_hex(adu), header, std::move(pdu)};
}

Frame decode(std::string_view hex, Direction direction) { return decode(from_hex(hex), direction); }

Frame make_exception(const Frame& request, std::uint8_t exception_code) {
  if (exception_code == 0) throw Error(Errc::kInvalidRequest, "exception_code", "exception codes start at 1");
  MbapHeader header{request.header.transaction_id, 0, 0, request.header.unit_id};
  return encode(header, Pdu{static_cast<std::uint8_t>(request.pdu.function_code | kExceptionFlag),
                            ExceptionBody{exception_code}});
}

Frame make_exception(std::string_view request_hex, std::uint8_t exception_code) {
  if (exception_code == 0) throw Error(Errc::kInvalidRequest, "exception_code", "exception codes start at 1");
  Bytes adu;
  try {
    adu = from_hex(request_hex);
  } catch (const Error& e) {
    throw Error(Errc::kInvalidRequest, "hex", e.what());
  }
  auto raw = split_adu(adu);
  if (!raw || raw->header.protocol_id != 0) throw Error(Errc::kInvalidRequest, "mbap", "request does not decode");
  // The function code byte is echoed even when it is outside the supported
  // set; that is how a device reports "illegal function".
  const std::uint8_t fc = raw->function_code | kExceptionFlag;
  Bytes out;
  put16(out, raw->header.transaction_id);
  put16(out, 0);
  put16(out, 3);
  out.push_back(raw->header.unit_id);
  out.push_back(fc);
  out.push_back(exception_code);
  Frame frame;
  frame.hex = to_hex(out);
  frame.header = MbapHeader{raw->header.transaction_id, 0, 3, raw->header.unit_id};
  frame.pdu = Pdu{fc, ExceptionBody{exception_code}};
  return frame;
}

Bytes pack_bits(std::span<const std::uint8_t> bits) {
  Bytes out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  return out;
}

std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> packed, std::size_t count) {
  std::vector<std::uint8_t> out(count, 0);
  for (std::size_t i = 0; i < count && i / 8 < packed.size(); ++i) out[i] = (packed[i / 8] >> (i % 8)) & 1u;
  return out;
}

Bytes pack_words(std::span<const std::uint16_t> words) {
  Bytes out;
  out.reserve(words.size() * 2);
  for (auto w : words) put16(out, w);
  return out;
}

std::vector<std::uint16_t> unpack_words(std::span<const std::uint8_t> packed) {
  std::vector<std::uint16_t> out;
  out.reserve(packed.size() / 2);
  for (std::size_t i = 0; i + 1 < packed.size(); i += 2) out.push_back(get16(packed, i));
  return out;
}

}  // namespace plcmimic::modbus
