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

#include "plcmimic/protocol.hpp"

#include <algorithm>

#include "plcmimic/error.hpp"
#include "plcmimic/modbus.hpp"
#include "plcmimic/s7comm.hpp"

namespace plcmimic {

namespace {

bool is_read(std::uint8_t fc) { return fc == modbus::kReadCoils || fc == modbus::kReadHoldingRegisters; }

// --- Modbus --------------------------------------------------------------

Bytes modbus_request(std::uint16_t id, std::uint8_t unit, const Operation& op) {
  if (op.address > 0xffff) throw Error(Errc::kInvalidRequest, "address", "Modbus addresses are 16-bit");
  modbus::MbapHeader h{id, 0, 0, unit};
  const std::uint8_t fc = function_for(op);
  const auto addr = static_cast<std::uint16_t>(op.address);
  modbus::Pdu pdu{fc, {}};
  switch (fc) {
    case modbus::kReadCoils:
    case modbus::kReadHoldingRegisters:
      pdu.body = modbus::ReadRequest{addr, op.count};
      break;
    case modbus::kWriteSingleCoil:
      pdu.body = modbus::WriteSingle{addr, op.values.at(0) ? modbus::kCoilOn : modbus::kCoilOff};
      break;
    case modbus::kWriteSingleRegister:
      pdu.body = modbus::WriteSingle{addr, op.values.at(0)};
      break;
    case modbus::kWriteMultipleCoils: {
      std::vector<std::uint8_t> bits(op.values.begin(), op.values.end());
      auto packed = modbus::pack_bits(bits);
      pdu.body = modbus::WriteMultiple{addr, static_cast<std::uint16_t>(op.values.size()),
                                       static_cast<std::uint8_t>(packed.size()), packed};
      break;
    }
    default: {
      auto packed = modbus::pack_words(op.values);
      pdu.body = modbus::WriteMultiple{addr, static_cast<std::uint16_t>(op.values.size()),
                                       static_cast<std::uint8_t>(packed.size()), packed};
      break;
    }
  }
  return modbus::encode(h, pdu).bytes();
}

Request modbus_parse(std::span<const std::uint8_t> frame) {
  auto raw = modbus::split_adu(frame);
  if (!raw || raw->header.protocol_id != 0)
    throw Error(Errc::kUndecodableRequest, "mbap", "frame does not carry a consistent MBAP header");
  Request req;
  req.protocol = Protocol::kModbus;
  req.id = raw->header.transaction_id;
  req.unit_id = raw->header.unit_id;
  req.function = raw->function_code;
  if (!modbus::is_supported_function(raw->function_code)) {
    req.supported = false;
    return req;
  }
  const std::uint8_t fc = raw->function_code;
  req.access = is_read(fc) ? Access::kRead : Access::kWrite;
  req.kind = modbus::is_digital_function(fc) ? DataKind::kDigital : DataKind::kAnalog;

  modbus::Frame decoded;
  try {
    decoded = modbus::decode(frame, modbus::Direction::kRequest);
  } catch (const Error&) {
    req.malformed = true;
    return req;
  }
  const auto& body = decoded.pdu.body;
  if (const auto* r = std::get_if<modbus::ReadRequest>(&body)) {
    req.address = r->address;
    req.count = r->quantity;
  } else if (const auto* w = std::get_if<modbus::WriteSingle>(&body)) {
    req.address = w->address;
    req.count = 1;
    if (fc == modbus::kWriteSingleCoil) {
      req.value_encoding_ok = w->value == modbus::kCoilOn || w->value == modbus::kCoilOff;
      req.values = {static_cast<std::uint16_t>(w->value == modbus::kCoilOn ? 1 : 0)};
    } else {
      req.values = {w->value};
    }
  } else if (const auto* m = std::get_if<modbus::WriteMultiple>(&body)) {
    req.address = m->address;
    req.count = m->quantity;
    if (fc == modbus::kWriteMultipleCoils) {
      for (auto b : modbus::unpack_bits(m->values, m->quantity)) req.values.push_back(b);
    } else {
      req.values = modbus::unpack_words(m->values);
    }
  }
  return req;
}

Bytes modbus_response(const Request& req, const Outcome& out) {
  if (out.type == OutcomeType::kException || !req.supported) {
    const std::uint8_t code = out.type == OutcomeType::kException ? out.exception : kExcIllegalFunction;
    Bytes adu{static_cast<std::uint8_t>(req.id >> 8), static_cast<std::uint8_t>(req.id & 0xff), 0, 0, 0, 3,
              req.unit_id, static_cast<std::uint8_t>(req.function | modbus::kExceptionFlag), code};
    return adu;
  }
  modbus::MbapHeader h{req.id, 0, 0, req.unit_id};
  modbus::Pdu pdu{req.function, {}};
  const auto addr = static_cast<std::uint16_t>(req.address);
  if (out.type == OutcomeType::kValues) {
    Bytes packed;
    if (req.kind == DataKind::kDigital) {
      std::vector<std::uint8_t> bits(out.values.begin(), out.values.end());
      packed = modbus::pack_bits(bits);
    } else {
      packed = modbus::pack_words(out.values);
    }
    pdu.body = modbus::ReadResponse{static_cast<std::uint8_t>(packed.size()), packed};
  } else {
    switch (req.function) {
      case modbus::kWriteSingleCoil:
        pdu.body = modbus::WriteAck{addr, req.values.at(0) ? modbus::kCoilOn : modbus::kCoilOff};
        break;
      case modbus::kWriteSingleRegister:
        pdu.body = modbus::WriteAck{addr, req.values.at(0)};
        break;
      default:
        pdu.body = modbus::WriteAck{addr, req.count};
        break;
    }
  }
  return modbus::encode(h, pdu).bytes();
}

// --- S7 ------------------------------------------------------------------

s7::Item digital_item(std::uint32_t index) {
  return s7::Item{s7::kItemBit, 1, kDigitalDb, s7::kAreaDataBlock, index};
}

s7::Item analog_item(std::uint32_t index, std::uint16_t count) {
  return s7::Item{s7::kItemWord, count, kAnalogDb, s7::kAreaDataBlock, (index * 2u) << 3};
}

Bytes s7_request(std::uint16_t id, const Operation& op) {
  const std::uint32_t limit = op.kind == DataKind::kDigital ? (1u << 24) : (1u << 20);
  if (op.address >= limit) throw Error(Errc::kInvalidRequest, "address", "beyond the S7 item address field");
  s7::Frame f;
  f.pdu_type = s7::kJob;
  f.pdu_ref = id;
  f.function = op.access == Access::kRead ? s7::kReadVar : s7::kWriteVar;
  const std::size_t n = op.access == Access::kRead ? op.count : op.values.size();
  if (op.kind == DataKind::kDigital) {
    for (std::size_t i = 0; i < n; ++i) {
      f.items.push_back(digital_item(op.address + static_cast<std::uint32_t>(i)));
      if (op.access == Access::kWrite)
        f.data.push_back(s7::DataItem{s7::kReturnReserved, s7::kDataBit,
                                      {static_cast<std::uint8_t>(op.values[i] ? 1 : 0)}});
    }
  } else {
    f.items.push_back(analog_item(op.address, static_cast<std::uint16_t>(n)));
    if (op.access == Access::kWrite)
      f.data.push_back(s7::DataItem{s7::kReturnReserved, s7::kDataByteWord, modbus::pack_words(op.values)});
  }
  return s7::encode_bytes(f);
}

Request s7_parse(std::span<const std::uint8_t> frame) {
  s7::Frame f;
  try {
    f = s7::decode(frame);
  } catch (const Error& e) {
    throw Error(Errc::kUndecodableRequest, e.field(), e.what());
  }
  if (!f.is_job()) throw Error(Errc::kUndecodableRequest, "S7", "ack_data sent as a request");

  Request req;
  req.protocol = Protocol::kS7Comm;
  req.id = f.pdu_ref;
  req.item_count = f.items.size();
  req.access = f.function == s7::kReadVar ? Access::kRead : Access::kWrite;

  const auto& items = f.items;
  const bool all_bits = std::all_of(items.begin(), items.end(), [](const s7::Item& it) {
    return it.transport_size == s7::kItemBit && it.count == 1 && it.db_number == kDigitalDb &&
           it.area == s7::kAreaDataBlock;
  });
  bool consecutive = true;
  for (std::size_t i = 1; i < items.size(); ++i) consecutive &= items[i].address == items[0].address + i;
  const bool one_word_item = items.size() == 1 && items[0].transport_size == s7::kItemWord &&
                             items[0].db_number == kAnalogDb && items[0].area == s7::kAreaDataBlock &&
                             (items[0].address & 0xf) == 0;

  if (all_bits && consecutive) {
    req.kind = DataKind::kDigital;
    req.address = items[0].address;
    req.count = static_cast<std::uint16_t>(items.size());
  } else if (one_word_item) {
    req.kind = DataKind::kAnalog;
    req.address = (items[0].address >> 3) / 2;
    req.count = items[0].count;
  } else {
    req.mapped = false;
    req.kind = items[0].transport_size == s7::kItemBit ? DataKind::kDigital : DataKind::kAnalog;
    req.count = static_cast<std::uint16_t>(items.size());
  }

  if (req.access == Access::kRead) {
    req.function = req.kind == DataKind::kDigital ? modbus::kReadCoils : modbus::kReadHoldingRegisters;
  } else if (req.kind == DataKind::kDigital) {
    req.function = items.size() == 1 ? modbus::kWriteSingleCoil : modbus::kWriteMultipleCoils;
  } else {
    req.function = req.count == 1 ? modbus::kWriteSingleRegister : modbus::kWriteMultipleRegisters;
  }

  if (req.access == Access::kWrite && req.mapped) {
    if (req.kind == DataKind::kDigital) {
      for (const auto& d : f.data) {
        if (d.transport_size != s7::kDataBit || d.data.size() != 1) {
          req.malformed = true;
          break;
        }
        if (d.data[0] > 1) req.value_encoding_ok = false;
        req.values.push_back(d.data[0] & 1);
      }
    } else {
      const auto& d = f.data.at(0);
      if (d.transport_size != s7::kDataByteWord || d.data.size() != 2u * req.count) {
        req.malformed = true;
      } else {
        req.values = modbus::unpack_words(d.data);
      }
    }
  }
  return req;
}

Bytes s7_response(const Request& req, const Outcome& out) {
  s7::Frame f;
  f.pdu_type = s7::kAckData;
  f.pdu_ref = req.id;
  f.function = req.access == Access::kRead ? s7::kReadVar : s7::kWriteVar;

  if (out.type == OutcomeType::kException &&
      (out.exception == kExcIllegalFunction || out.exception == kExcDeviceFailure)) {
    const bool fn = out.exception == kExcIllegalFunction;
    f.error_class = fn ? kS7FunctionErrorClass : kS7FailureErrorClass;
    f.error_code = fn ? kS7FunctionErrorCode : kS7FailureErrorCode;
    return s7::encode_bytes(f);
  }
  if (out.type == OutcomeType::kException) {
    const std::uint8_t rc = s7_item_return_code(req, out.exception);
    for (std::size_t i = 0; i < req.item_count; ++i) {
      if (req.access == Access::kRead) {
        f.data.push_back(s7::DataItem{rc, s7::kDataNull, {}});
      } else {
        f.results.push_back(rc);
      }
    }
    return s7::encode_bytes(f);
  }
  if (out.type == OutcomeType::kWriteOk) {
    f.results.assign(req.item_count, s7::kReturnSuccess);
    return s7::encode_bytes(f);
  }
  if (req.kind == DataKind::kDigital) {
    for (auto v : out.values)
      f.data.push_back(s7::DataItem{s7::kReturnSuccess, s7::kDataBit, {static_cast<std::uint8_t>(v ? 1 : 0)}});
  } else {
    f.data.push_back(s7::DataItem{s7::kReturnSuccess, s7::kDataByteWord, modbus::pack_words(out.values)});
  }
  return s7::encode_bytes(f);
}

std::uint16_t max_quantity(const Request& req) {
  if (req.protocol == Protocol::kS7Comm) return 0xffff;
  switch (req.function) {
    case modbus::kReadCoils: return modbus::kMaxReadCoils;
    case modbus::kReadHoldingRegisters: return modbus::kMaxReadRegisters;
    case modbus::kWriteMultipleCoils: return modbus::kMaxWriteCoils;
    case modbus::kWriteMultipleRegisters: return modbus::kMaxWriteRegisters;
    default: return 1;
  }
}

}  // namespace

std::uint8_t function_for(const Operation& op) {
  if (op.access == Access::kRead)
    return op.kind == DataKind::kDigital ? modbus::kReadCoils : modbus::kReadHoldingRegisters;
  const bool single = op.values.size() == 1 && !op.force_multiple;
  if (op.kind == DataKind::kDigital) return single ? modbus::kWriteSingleCoil : modbus::kWriteMultipleCoils;
  return single ? modbus::kWriteSingleRegister : modbus::kWriteMultipleRegisters;
}

Bytes build_request(Protocol protocol, std::uint16_t id, std::uint8_t unit_id, const Operation& op) {
  if (op.access == Access::kWrite && op.values.empty()) throw Error(Errc::kInvalidRequest, "values", "empty write");
  if (op.access == Access::kRead && op.count == 0) throw Error(Errc::kInvalidRequest, "count", "empty read");
  return protocol == Protocol::kModbus ? modbus_request(id, unit_id, op) : s7_request(id, op);
}

std::uint8_t s7_item_return_code(const Request& req, std::uint8_t exception) {
  switch (exception) {
    case kExcIllegalAddress:
      return req.mapped ? s7::kReturnAddressOutOfRange : s7::kReturnObjectDoesNotExist;
    case kExcIllegalValue:
      return s7::kReturnDataTypeInconsistent;
    default:
      return s7::kReturnHardwareFault;
  }
}

Request parse_request(Protocol protocol, std::span<const std::uint8_t> frame) {
  return protocol == Protocol::kModbus ? modbus_parse(frame) : s7_parse(frame);
}

Bytes build_response(const Request& request, const Outcome& outcome) {
  return request.protocol == Protocol::kModbus ? modbus_response(request, outcome) : s7_response(request, outcome);
}

std::optional<std::uint8_t> mandated_exception(const ProtocolConfig& cfg, const Request& req) {
  if (!req.supported || !cfg.allows(req.function)) return kExcIllegalFunction;
  if (req.malformed || req.count == 0 || req.count > max_quantity(req)) return kExcIllegalValue;
  if (!req.mapped || !cfg.range(req.kind).contains(req.address, req.count)) return kExcIllegalAddress;
  if (req.access == Access::kWrite) {
    if (!req.value_encoding_ok) return kExcIllegalValue;
    if (req.kind == DataKind::kAnalog)
      for (auto v : req.values)
        if (v < cfg.val_low || v > cfg.val_high) return kExcIllegalValue;
  }
  return std::nullopt;
}

std::optional<std::size_t> frame_size(Protocol protocol, std::span<const std::uint8_t> stream) noexcept {
  return protocol == Protocol::kModbus ? modbus::announced_size(stream) : s7::announced_size(stream);
}

}  // namespace plcmimic
