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

#include "plcmimic/metrics.hpp"

#include <cstdlib>

#include <json.hpp>

#include "plcmimic/error.hpp"
#include "plcmimic/hex.hpp"
#include "plcmimic/modbus.hpp"
#include "plcmimic/s7comm.hpp"

namespace plcmimic {

namespace {

RvaResult fail(std::string reason) { return {false, std::move(reason)}; }

bool padding_clear(const Bytes& packed, std::size_t count) {
  if (count % 8 == 0 || packed.empty()) return true;
  return (packed.back() >> (count % 8)) == 0;
}

bool in_range(const ProtocolConfig& cfg, const std::vector<std::uint16_t>& values) {
  for (auto v : values)
    if (v < cfg.val_low || v > cfg.val_high) return false;
  return true;
}

RvaResult rva_modbus(const ProtocolConfig& cfg, const Request& req, const Bytes& pred) {
  const auto raw = modbus::split_adu(pred);
  if (!raw) return fail("framing");
  if (raw->header.protocol_id != 0) return fail("protocol_id");
  if (raw->header.transaction_id != req.id) return fail("transaction_id");
  if (raw->header.unit_id != req.unit_id) return fail("unit_id");
  const auto mandated = mandated_exception(cfg, req);

  if (raw->function_code & modbus::kExceptionFlag) {
    if (!mandated) return fail("unexpected_exception");
    if (raw->function_code != (req.function | modbus::kExceptionFlag)) return fail("function_code");
    if (raw->body.size() != 1) return fail("length");
    if (raw->body[0] != *mandated) return fail("exception_code");
    return {true, {}};
  }
  if (mandated) return fail("missing_exception");
  if (raw->function_code != req.function) return fail("function_code");

  modbus::Frame f;
  try {
    f = modbus::decode(pred, modbus::Direction::kResponse);
  } catch (const Error&) {
    return fail("decode");
  }
  const auto& body = f.pdu.body;
  if (req.access == Access::kRead) {
    const auto* r = std::get_if<modbus::ReadResponse>(&body);
    if (r == nullptr) return fail("decode");
    const std::size_t want = req.kind == DataKind::kDigital ? (req.count + 7u) / 8u : 2u * req.count;
    if (r->values.size() != want) return fail("shape");
    if (req.kind == DataKind::kDigital) {
      if (!padding_clear(r->values, req.count)) return fail("padding");
    } else if (!in_range(cfg, modbus::unpack_words(r->values))) {
      return fail("value_range");
    }
    return {true, {}};
  }
  const auto* ack = std::get_if<modbus::WriteAck>(&body);
  if (ack == nullptr) return fail("decode");
  if (ack->address != req.address) return fail("echo");
  std::uint16_t want = req.count;
  if (req.function == modbus::kWriteSingleCoil) want = req.values.at(0) ? modbus::kCoilOn : modbus::kCoilOff;
  if (req.function == modbus::kWriteSingleRegister) want = req.values.at(0);
  if (ack->quantity_or_value != want) return fail("echo");
  return {true, {}};
}

RvaResult rva_s7(const ProtocolConfig& cfg, const Request& req, const Bytes& pred) {
  s7::Frame f;
  try {
    f = s7::decode(pred);
  } catch (const Error&) {
    return fail("decode");
  }
  if (f.pdu_type != s7::kAckData) return fail("pdu_type");
  if (f.pdu_ref != req.id) return fail("pdu_ref");
  const std::uint8_t function = req.access == Access::kRead ? s7::kReadVar : s7::kWriteVar;
  if (f.function != function) return fail("function_code");
  const auto mandated = mandated_exception(cfg, req);

  if (f.is_error()) {
    if (!mandated || *mandated != kExcIllegalFunction) return fail("unexpected_exception");
    if (f.error_class != kS7FunctionErrorClass || f.error_code != kS7FunctionErrorCode) return fail("exception_code");
    if (!f.data.empty() || !f.results.empty()) return fail("shape");
    return {true, {}};
  }
  if (mandated && *mandated == kExcIllegalFunction) return fail("missing_exception");

  if (req.access == Access::kWrite) {
    if (f.results.size() != req.item_count) return fail("shape");
    const std::uint8_t want = mandated ? s7_item_return_code(req, *mandated) : s7::kReturnSuccess;
    for (auto rc : f.results) {
      if (rc == want) continue;
      return fail(mandated ? (rc == s7::kReturnSuccess ? "missing_exception" : "exception_code")
                           : "unexpected_exception");
    }
    return {true, {}};
  }
  if (mandated) {
    if (f.data.size() != req.item_count) return fail("shape");
    const std::uint8_t want = s7_item_return_code(req, *mandated);
    for (const auto& d : f.data) {
      if (d.return_code == s7::kReturnSuccess) return fail("missing_exception");
      if (d.return_code != want) return fail("exception_code");
      if (d.transport_size != s7::kDataNull || !d.data.empty()) return fail("shape");
    }
    return {true, {}};
  }
  if (req.kind == DataKind::kDigital) {
    if (f.data.size() != req.count) return fail("shape");
    for (const auto& d : f.data) {
      if (d.return_code != s7::kReturnSuccess) return fail("unexpected_exception");
      if (d.transport_size != s7::kDataBit || d.data.size() != 1) return fail("shape");
      if (d.data[0] > 1) return fail("padding");
    }
    return {true, {}};
  }
  if (f.data.size() != 1) return fail("shape");
  const auto& d = f.data[0];
  if (d.return_code != s7::kReturnSuccess) return fail("unexpected_exception");
  if (d.transport_size != s7::kDataByteWord || d.data.size() != 2u * req.count) return fail("shape");
  if (!in_range(cfg, modbus::unpack_words(d.data))) return fail("value_range");
  return {true, {}};
}

}  // namespace

bool bca(std::string_view predicted, std::string_view reference) {
  try {
    return canonical_hex(predicted) == canonical_hex(reference);
  } catch (const Error&) {
    return false;
  }
}

RvaResult rva(const ProtocolConfig& cfg, std::string_view request_hex, std::string_view predicted) {
  Bytes req_bytes, pred;
  try {
    req_bytes = from_hex(canonical_hex(request_hex));
  } catch (const Error&) {
    return fail("request_undecodable");
  }
  try {
    pred = from_hex(canonical_hex(predicted));
  } catch (const Error&) {
    return fail("not_hex");
  }
  if (pred.empty()) return fail("empty");
  Request req;
  try {
    req = parse_request(cfg.protocol, req_bytes);
  } catch (const Error&) {
    return fail("request_undecodable");
  }
  return cfg.protocol == Protocol::kModbus ? rva_modbus(cfg, req, pred) : rva_s7(cfg, req, pred);
}

ResponseView view_response(Protocol protocol, const Request& req, std::string_view response_hex) {
  const Bytes bytes = from_hex(canonical_hex(response_hex));
  ResponseView v;
  v.kind = req.kind;
  if (protocol == Protocol::kModbus) {
    const auto raw = modbus::split_adu(bytes);
    if (!raw) throw Error(Errc::kTruncated, "mbap", "response framing");
    if (raw->function_code & modbus::kExceptionFlag) {
      if (raw->body.size() != 1) throw Error(Errc::kLengthMismatch, "pdu", "exception body");
      v.type = OutcomeType::kException;
      v.exception = raw->body[0];
      return v;
    }
    const auto f = modbus::decode(bytes, modbus::Direction::kResponse);
    if (const auto* r = std::get_if<modbus::ReadResponse>(&f.pdu.body)) {
      v.type = OutcomeType::kValues;
      if (req.kind == DataKind::kDigital) {
        for (auto b : modbus::unpack_bits(r->values, std::min<std::size_t>(req.count, r->values.size() * 8u)))
          v.values.push_back(b);
      } else {
        v.values = modbus::unpack_words(r->values);
      }
    } else {
      v.type = OutcomeType::kWriteOk;
    }
    return v;
  }
  const auto f = s7::decode(bytes);
  if (f.is_error()) {
    v.type = OutcomeType::kException;
    v.exception = f.error_class == kS7FunctionErrorClass ? kExcIllegalFunction : kExcDeviceFailure;
    return v;
  }
  const auto first_failure = [&]() -> std::optional<std::uint8_t> {
    for (const auto& d : f.data)
      if (d.return_code != s7::kReturnSuccess) return d.return_code;
    for (auto rc : f.results)
      if (rc != s7::kReturnSuccess) return rc;
    return std::nullopt;
  }();
  if (first_failure) {
    v.type = OutcomeType::kException;
    v.exception = *first_failure == s7::kReturnDataTypeInconsistent ? kExcIllegalValue
                  : (*first_failure == s7::kReturnAddressOutOfRange ||
                     *first_failure == s7::kReturnObjectDoesNotExist)
                      ? kExcIllegalAddress
                      : kExcDeviceFailure;
    return v;
  }
  if (f.function == s7::kWriteVar) {
    v.type = OutcomeType::kWriteOk;
    return v;
  }
  v.type = OutcomeType::kValues;
  for (const auto& d : f.data) {
    if (d.transport_size == s7::kDataBit) {
      for (auto b : d.data) v.values.push_back(b);
    } else {
      const auto words = modbus::unpack_words(d.data);
      v.values.insert(v.values.end(), words.begin(), words.end());
    }
  }
  return v;
}

bool rva_eps(const ProtocolConfig& cfg, std::string_view request_hex, std::string_view predicted,
             std::string_view reference, std::uint32_t eps) {
  if (!rva(cfg, request_hex, predicted).valid) return false;
  try {
    const Request req = parse_request(cfg.protocol, from_hex(canonical_hex(request_hex)));
    const auto p = view_response(cfg.protocol, req, predicted);
    const auto r = view_response(cfg.protocol, req, reference);
    if (p.type != r.type) return false;
    if (p.type == OutcomeType::kException) return p.exception == r.exception;
    if (p.values.size() != r.values.size()) return false;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      const int diff = std::abs(static_cast<int>(p.values[i]) - static_cast<int>(r.values[i]));
      if (req.kind == DataKind::kDigital ? diff != 0 : static_cast<std::uint32_t>(diff) > eps) return false;
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::string query_of(const std::string& source_text) {
  if (source_text.find(':') == std::string::npos) return source_text;
  return unframe(source_text).query;
}

MetricReport score(const ProtocolConfig& cfg, const std::vector<SamplePair>& records,
                   const std::vector<std::string>& predictions, const std::vector<std::uint32_t>& eps_list) {
  if (records.size() != predictions.size())
    throw Error(Errc::kInvalidRequest, "predictions", "one prediction per record required");
  MetricReport m;
  m.n = records.size();
  std::size_t n_bca = 0, n_rva = 0;
  std::map<std::uint32_t, std::size_t> n_eps;
  for (auto e : eps_list) n_eps[e] = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string query = query_of(records[i].source_text);
    const auto& pred = predictions[i];
    if (bca(pred, records[i].target_text)) ++n_bca;
    const auto r = rva(cfg, query, pred);
    if (!r.valid) {
      ++m.failures[r.reason];
      continue;
    }
    ++n_rva;
    for (auto& [e, count] : n_eps)
      if (rva_eps(cfg, query, pred, records[i].target_text, e)) ++count;
  }
  const double n = m.n == 0 ? 1.0 : static_cast<double>(m.n);
  m.bca = static_cast<double>(n_bca) / n;
  m.rva = static_cast<double>(n_rva) / n;
  for (const auto& [e, count] : n_eps) m.rva_eps[e] = static_cast<double>(count) / n;
  return m;
}

MetricReport evaluate(const ProtocolConfig& cfg, const std::vector<SamplePair>& records, Responder& responder,
                      const std::vector<std::uint32_t>& eps_list, std::chrono::milliseconds budget) {
  std::vector<std::string> predictions;
  predictions.reserve(records.size());
  std::size_t errors = 0;
  for (const auto& rec : records) {
    try {
      predictions.push_back(responder.respond(rec.source_text, budget));
    } catch (const Error&) {
      predictions.emplace_back();
      ++errors;
    }
  }
  auto m = score(cfg, records, predictions, eps_list);
  m.responder_errors = errors;
  return m;
}

std::string MetricReport::to_json() const {
  nlohmann::json eps = nlohmann::json::object();
  for (const auto& [e, v] : rva_eps) eps[std::to_string(e)] = v;
  nlohmann::json j{{"n", n},     {"bca", bca},           {"rva", rva},
                   {"rva_eps", eps}, {"failures", failures}, {"responder_errors", responder_errors}};
  return j.dump(2);
}

std::string MetricReport::curve_csv() const {
  std::string out = "eps,rva_eps\n";
  for (const auto& [e, v] : rva_eps) out += std::to_string(e) + "," + std::to_string(v) + "\n";
  return out;
}

}  // namespace plcmimic
