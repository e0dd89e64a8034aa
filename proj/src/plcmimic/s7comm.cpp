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

#include "plcmimic/s7comm.hpp"

#include <algorithm>

#include "plcmimic/error.hpp"

namespace plcmimic::s7 {

namespace {

constexpr std::uint8_t kCotpDataTpdu = 0xf0;
constexpr std::uint8_t kCotpConnectRequest = 0xe0;
constexpr std::uint8_t kCotpConnectConfirm = 0xd0;
constexpr std::uint8_t kCotpEot = 0x80;
constexpr std::size_t kItemSpecSize = 12;
constexpr std::size_t kJobHeaderSize = 10;
constexpr std::size_t kAckHeaderSize = 12;
constexpr std::uint16_t kMaxPduLength = 480;

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

std::uint16_t get16(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint16_t>(in[at] << 8 | in[at + 1]);
}

[[noreturn]] void bad_item(const std::string& where, const std::string& detail) {
  throw Error(Errc::kInvalidItem, where, detail);
}

std::uint16_t data_length_field(const DataItem& item) {
  switch (item.transport_size) {
    case kDataByteWord: return static_cast<std::uint16_t>(item.data.size() * 8);
    case kDataNull: return 0;
    default: return static_cast<std::uint16_t>(item.data.size());  // bits (one byte each) or octets
  }
}

void check(const Frame& f) {
  if (f.pdu_type != kJob && f.pdu_type != kAckData) bad_item("S7", "pdu type must be job or ack_data");
  if (f.function != kReadVar && f.function != kWriteVar) bad_item("S7", "function must be read-var or write-var");
  if (f.is_job()) {
    if (f.error_class != 0 || f.error_code != 0) bad_item("S7", "jobs carry no error fields");
    if (f.items.empty()) bad_item("S7 parameter", "job without items");
    if (f.items.size() > 0xff) bad_item("S7 parameter", "more than 255 items");
    for (std::size_t i = 0; i < f.items.size(); ++i) {
      const auto& it = f.items[i];
      if (it.count == 0) bad_item("S7 item " + std::to_string(i), "count must be >= 1");
      if (it.address >= (1u << 24)) bad_item("S7 item " + std::to_string(i), "address exceeds 24 bits");
      if (it.transport_size == 0) bad_item("S7 item " + std::to_string(i), "transport size 0");
    }
    if (!f.results.empty()) bad_item("S7 data", "jobs carry no return codes");
    if (f.function == kReadVar && !f.data.empty()) bad_item("S7 data", "read job with payload");
    if (f.function == kWriteVar && f.data.size() != f.items.size())
      bad_item("S7 data", "write job needs one data item per parameter item");
  } else {
    if (!f.items.empty()) bad_item("S7 parameter", "ack_data carries no item specs");
    if (f.is_error()) {
      if (!f.data.empty() || !f.results.empty()) bad_item("S7 data", "error ack carries no items");
    } else if (f.function == kReadVar) {
      if (f.data.empty()) bad_item("S7 data", "read ack without items");
      if (!f.results.empty()) bad_item("S7 data", "read ack with write return codes");
    } else {
      if (f.results.empty()) bad_item("S7 data", "write ack without return codes");
      if (!f.data.empty()) bad_item("S7 data", "write ack with payload");
    }
    if (f.data.size() > 0xff || f.results.size() > 0xff) bad_item("S7 parameter", "more than 255 items");
  }
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    const auto& d = f.data[i];
    if (d.transport_size == kDataNull && !d.data.empty())
      bad_item("S7 data item " + std::to_string(i), "null transport with payload");
    if (d.data.size() > 0x1fff) bad_item("S7 data item " + std::to_string(i), "payload too long");
  }
}

void append_data_items(Bytes& out, const std::vector<DataItem>& items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& d = items[i];
    out.push_back(d.return_code);
    out.push_back(d.transport_size);
    put16(out, data_length_field(d));
    out.insert(out.end(), d.data.begin(), d.data.end());
    if (i + 1 < items.size() && d.data.size() % 2 != 0) out.push_back(0x00);
  }
}

std::vector<DataItem> parse_data_items(std::span<const std::uint8_t> in, std::size_t count) {
  std::vector<DataItem> items;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string where = "S7 data item " + std::to_string(i);
    if (pos + 4 > in.size()) throw Error(Errc::kTruncated, where, "item header");
    DataItem d;
    d.return_code = in[pos];
    d.transport_size = in[pos + 1];
    const std::uint16_t len = get16(in, pos + 2);
    pos += 4;
    std::size_t nbytes = len;
    if (d.transport_size == kDataByteWord) {
      if (len % 8 != 0) bad_item(where, "bit length not a whole number of bytes");
      nbytes = len / 8;
    } else if (d.transport_size == kDataNull && len != 0) {
      bad_item(where, "null transport with payload");
    }
    if (pos + nbytes > in.size()) throw Error(Errc::kTruncated, where, "payload");
    d.data.assign(in.begin() + static_cast<std::ptrdiff_t>(pos), in.begin() + static_cast<std::ptrdiff_t>(pos + nbytes));
    pos += nbytes;
    if (i + 1 < count && nbytes % 2 != 0) {
      if (pos >= in.size()) throw Error(Errc::kTruncated, where, "fill byte");
      if (in[pos] != 0x00) bad_item(where, "fill byte set");
      ++pos;
    }
    items.push_back(std::move(d));
  }
  if (pos != in.size()) throw Error(Errc::kLengthMismatch, "S7 data", "trailing bytes after last item");
  return items;
}

Bytes wrap_tpkt(const Bytes& s7pdu) {
  Bytes out;
  out.reserve(kTpktSize + kCotpDataSize + s7pdu.size());
  out.push_back(kTpktVersion);
  out.push_back(0x00);
  put16(out, static_cast<std::uint16_t>(kTpktSize + kCotpDataSize + s7pdu.size()));
  out.push_back(0x02);
  out.push_back(kCotpDataTpdu);
  out.push_back(kCotpEot);
  out.insert(out.end(), s7pdu.begin(), s7pdu.end());
  return out;
}

}  // namespace

Bytes encode_bytes(const Frame& f) {
  check(f);
  Bytes param;
  param.push_back(f.function);
  if (f.is_job()) {
    param.push_back(static_cast<std::uint8_t>(f.items.size()));
    for (const auto& it : f.items) {
      param.push_back(0x12);
      param.push_back(0x0a);
      param.push_back(0x10);
      param.push_back(it.transport_size);
      put16(param, it.count);
      put16(param, it.db_number);
      param.push_back(it.area);
      param.push_back(static_cast<std::uint8_t>(it.address >> 16));
      param.push_back(static_cast<std::uint8_t>(it.address >> 8));
      param.push_back(static_cast<std::uint8_t>(it.address));
    }
  } else {
    const std::size_t count = f.is_error() ? 0 : (f.function == kReadVar ? f.data.size() : f.results.size());
    param.push_back(static_cast<std::uint8_t>(count));
  }

  Bytes data;
  append_data_items(data, f.data);
  data.insert(data.end(), f.results.begin(), f.results.end());

  Bytes s7pdu;
  s7pdu.push_back(kProtocolId);
  s7pdu.push_back(f.pdu_type);
  put16(s7pdu, 0x0000);
  put16(s7pdu, f.pdu_ref);
  put16(s7pdu, static_cast<std::uint16_t>(param.size()));
  put16(s7pdu, static_cast<std::uint16_t>(data.size()));
  if (!f.is_job()) {
    s7pdu.push_back(f.error_class);
    s7pdu.push_back(f.error_code);
  }
  s7pdu.insert(s7pdu.end(), param.begin(), param.end());
  s7pdu.insert(s7pdu.end(), data.begin(), data.end());
  if (s7pdu.size() + kTpktSize + kCotpDataSize > 0xffff) bad_item("TPKT", "frame exceeds 65535 bytes");
  return wrap_tpkt(s7pdu);
}

std::string encode(const Frame& frame) { return to_hex(encode_bytes(frame)); }

std::optional<std::size_t> announced_size(std::span<const std::uint8_t> stream) noexcept {
  if (stream.size() < kTpktSize) return std::nullopt;
  return get16(stream, 2);
}

Frame decode(std::span<const std::uint8_t> in) {
  if (in.size() < kTpktSize) throw Error(Errc::kTruncated, "TPKT", std::to_string(in.size()) + " bytes");
  if (in[0] != kTpktVersion) throw Error(Errc::kBadProtocolId, "TPKT", "version " + std::to_string(in[0]));
  if (in[1] != 0x00) throw Error(Errc::kBadProtocolId, "TPKT", "reserved byte set");
  const std::size_t total = get16(in, 2);
  if (in.size() < total) throw Error(Errc::kTruncated, "TPKT", "length field announces " + std::to_string(total));
  if (in.size() > total) throw Error(Errc::kLengthMismatch, "TPKT", "trailing bytes after declared length");
  if (total < kTpktSize + kCotpDataSize) throw Error(Errc::kTruncated, "COTP", "missing data TPDU header");
  if (in[4] != 0x02) throw Error(Errc::kLengthMismatch, "COTP", "length indicator " + std::to_string(in[4]));
  if (in[5] != kCotpDataTpdu) throw Error(Errc::kUnknownFunction, "COTP", "not a data TPDU");
  if (in[6] != kCotpEot) throw Error(Errc::kInvalidItem, "COTP", "segmented data TPDU");

  auto s7pdu = in.subspan(kTpktSize + kCotpDataSize);
  if (s7pdu.size() < kJobHeaderSize) throw Error(Errc::kTruncated, "S7", "header");
  if (s7pdu[0] != kProtocolId) throw Error(Errc::kBadProtocolId, "S7", "protocol id " + std::to_string(s7pdu[0]));
  if (s7pdu[2] != 0 || s7pdu[3] != 0) throw Error(Errc::kBadProtocolId, "S7", "reserved field set");

  Frame f;
  f.pdu_type = s7pdu[1];
  if (f.pdu_type != kJob && f.pdu_type != kAckData) throw Error(Errc::kUnknownFunction, "S7", "pdu type");
  const std::size_t header_size = f.is_job() ? kJobHeaderSize : kAckHeaderSize;
  if (s7pdu.size() < header_size) throw Error(Errc::kTruncated, "S7", "header");
  f.pdu_ref = get16(s7pdu, 4);
  const std::uint16_t param_len = get16(s7pdu, 6);
  const std::uint16_t data_len = get16(s7pdu, 8);
  if (!f.is_job()) {
    f.error_class = s7pdu[10];
    f.error_code = s7pdu[11];
  }
  if (s7pdu.size() - header_size != static_cast<std::size_t>(param_len) + data_len)
    throw Error(Errc::kLengthMismatch, "S7", "parameter + data length disagree with TPKT");

  auto param = s7pdu.subspan(header_size, param_len);
  auto data = s7pdu.subspan(header_size + param_len, data_len);
  if (param.size() < 2) throw Error(Errc::kTruncated, "S7 parameter", "missing function/count");
  f.function = param[0];
  if (f.function != kReadVar && f.function != kWriteVar)
    throw Error(Errc::kUnknownFunction, "S7", "function " + std::to_string(f.function));
  const std::size_t count = param[1];

  if (f.is_job()) {
    if (param.size() != 2 + kItemSpecSize * count)
      throw Error(Errc::kLengthMismatch, "S7 parameter", "item list size");
    if (count == 0) bad_item("S7 parameter", "job without items");
    for (std::size_t i = 0; i < count; ++i) {
      auto spec = param.subspan(2 + i * kItemSpecSize, kItemSpecSize);
      if (spec[0] != 0x12 || spec[1] != 0x0a || spec[2] != 0x10)
        bad_item("S7 item " + std::to_string(i), "unsupported variable specification");
      Item it;
      it.transport_size = spec[3];
      it.count = get16(spec, 4);
      it.db_number = get16(spec, 6);
      it.area = spec[8];
      it.address = static_cast<std::uint32_t>(spec[9]) << 16 | static_cast<std::uint32_t>(spec[10]) << 8 | spec[11];
      f.items.push_back(it);
    }
    if (f.function == kReadVar) {
      if (!data.empty()) throw Error(Errc::kLengthMismatch, "S7 data", "read job with payload");
    } else {
      f.data = parse_data_items(data, count);
    }
  } else {
    if (param.size() != 2) throw Error(Errc::kLengthMismatch, "S7 parameter", "ack parameter is function + count");
    if (f.is_error()) {
      if (count != 0 || !data.empty()) bad_item("S7 data", "error ack carries no items");
    } else if (f.function == kReadVar) {
      f.data = parse_data_items(data, count);
    } else {
      if (data.size() != count) throw Error(Errc::kLengthMismatch, "S7 data", "one return code per item");
      f.results.assign(data.begin(), data.end());
    }
  }
  check(f);
  return f;
}

Frame decode(std::string_view hex) { return decode(from_hex(hex)); }

Frame make_error_ack(const Frame& job, std::uint8_t error_class, std::uint8_t error_code) {
  Frame ack;
  ack.pdu_type = kAckData;
  ack.pdu_ref = job.pdu_ref;
  ack.error_class = error_class;
  ack.error_code = error_code;
  ack.function = job.function;
  return ack;
}

bool is_connect_request(std::span<const std::uint8_t> t) noexcept {
  return t.size() >= 7 && t[0] == kTpktVersion && t[5] == kCotpConnectRequest;
}

bool is_setup_request(std::span<const std::uint8_t> t) noexcept {
  return t.size() >= 18 && t[0] == kTpktVersion && t[5] == kCotpDataTpdu && t[7] == kProtocolId && t[8] == kJob &&
         t[17] == kSetupCommunication;
}

bool is_handshake(std::span<const std::uint8_t> t) noexcept { return is_connect_request(t) || is_setup_request(t); }

bool is_handshake_reply(std::span<const std::uint8_t> t) noexcept {
  if (t.size() >= 7 && t[0] == kTpktVersion && t[5] == kCotpConnectConfirm) return true;
  return t.size() >= 20 && t[0] == kTpktVersion && t[5] == kCotpDataTpdu && t[7] == kProtocolId &&
         t[8] == kAckData && t[19] == kSetupCommunication;
}

Bytes connect_request(std::uint16_t source_ref) {
  Bytes out{kTpktVersion, 0x00, 0x00, 0x16, 0x11, kCotpConnectRequest, 0x00, 0x00};
  put16(out, source_ref);
  const std::uint8_t tail[] = {0x00, 0xc1, 0x02, 0x01, 0x00, 0xc2, 0x02, 0x01, 0x01, 0xc0, 0x01, 0x0a};
  out.insert(out.end(), std::begin(tail), std::end(tail));
  return out;
}

Bytes connect_confirm(std::span<const std::uint8_t> request) {
  Bytes out(request.begin(), request.end());
  if (out.size() < 11) return out;
  out[5] = kCotpConnectConfirm;
  out[6] = request[8];
  out[7] = request[9];
  out[8] = 0x00;
  out[9] = 0x01;
  return out;
}

Bytes setup_request(std::uint16_t pdu_ref, std::uint16_t pdu_length) {
  Bytes s7pdu{kProtocolId, kJob, 0x00, 0x00};
  put16(s7pdu, pdu_ref);
  put16(s7pdu, 8);
  put16(s7pdu, 0);
  const std::uint8_t param[] = {kSetupCommunication, 0x00, 0x00, 0x01, 0x00, 0x01};
  s7pdu.insert(s7pdu.end(), std::begin(param), std::end(param));
  put16(s7pdu, pdu_length);
  return wrap_tpkt(s7pdu);
}

Bytes setup_response(std::span<const std::uint8_t> request) {
  Bytes s7pdu{kProtocolId, kAckData, 0x00, 0x00};
  const std::uint16_t ref = request.size() >= 13 ? get16(request, 11) : 0;
  put16(s7pdu, ref);
  put16(s7pdu, 8);
  put16(s7pdu, 0);
  s7pdu.push_back(0x00);
  s7pdu.push_back(0x00);
  Bytes param{kSetupCommunication, 0x00, 0x00, 0x01, 0x00, 0x01};
  std::uint16_t requested = request.size() >= 25 ? get16(request, 23) : kMaxPduLength;
  put16(param, std::min(requested, kMaxPduLength));
  if (request.size() >= 23) std::copy(request.begin() + 19, request.begin() + 23, param.begin() + 2);
  s7pdu.insert(s7pdu.end(), param.begin(), param.end());
  return wrap_tpkt(s7pdu);
}

}  // namespace plcmimic::s7
