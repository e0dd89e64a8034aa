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

#include "plcmimic/dataset.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "plcmimic/error.hpp"
#include "plcmimic/s7comm.hpp"

namespace plcmimic {

namespace {

constexpr std::string_view kHeader = "source_text,target_text";

std::optional<std::uint32_t> transaction_key(Protocol protocol, const Bytes& b) {
  if (protocol == Protocol::kModbus) {
    if (b.size() < 7) return std::nullopt;
    return (static_cast<std::uint32_t>(b[0]) << 16) | (static_cast<std::uint32_t>(b[1]) << 8) | b[6];
  }
  if (b.size() < 13) return std::nullopt;
  return (static_cast<std::uint32_t>(b[11]) << 8) | b[12];
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits one CSV record starting at `pos`; advances `pos` past its line end.
std::vector<std::string> csv_record(std::string_view text, std::size_t& pos) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  while (pos < text.size()) {
    const char c = text[pos++];
    if (quoted) {
      if (c == '"' && pos < text.size() && text[pos] == '"') {
        fields.back() += '"';
        ++pos;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw Error(Errc::kIo, "csv", "unterminated quoted field");
  return fields;
}

}  // namespace

PairingResult pair_transactions(Protocol protocol, const std::vector<CaptureRecord>& records) {
  PairingResult out;
  using Key = std::pair<std::string, std::uint32_t>;
  std::map<Key, std::deque<std::size_t>> waiting;  // request slot indices
  struct Slot {
    const CaptureRecord* request;
    const CaptureRecord* response = nullptr;
  };
  std::vector<Slot> slots;

  for (const auto& r : records) {
    if (protocol == Protocol::kS7Comm && (s7::is_handshake(r.bytes) || s7::is_handshake_reply(r.bytes))) {
      ++out.ignored;
      continue;
    }
    const auto key = transaction_key(protocol, r.bytes);
    if (!key) {
      out.orphans.push_back(r);
      continue;
    }
    if (r.is_request) {
      waiting[{r.stream, *key}].push_back(slots.size());
      slots.push_back({&r});
      continue;
    }
    auto it = waiting.find({r.stream, *key});
    if (it == waiting.end() || it->second.empty()) {
      out.orphans.push_back(r);
      continue;
    }
    slots[it->second.front()].response = &r;
    it->second.pop_front();
  }
  for (const auto& s : slots) {
    if (s.response == nullptr) {
      out.orphans.push_back(*s.request);
    } else {
      out.pairs.push_back({to_hex(s.request->bytes), to_hex(s.response->bytes)});
    }
  }
  return out;
}

std::string to_csv(const std::vector<SamplePair>& pairs) {
  std::string out(kHeader);
  out += '\n';
  for (const auto& p : pairs) out += csv_field(p.source_text) + "," + csv_field(p.target_text) + "\n";
  return out;
}

std::vector<SamplePair> parse_csv(std::string_view text) {
  std::size_t pos = 0;
  const auto header = csv_record(text, pos);
  if (header.size() != 2 || header[0] != "source_text" || header[1] != "target_text")
    throw Error(Errc::kIo, "csv", "expected header 'source_text,target_text'");
  std::vector<SamplePair> out;
  std::size_t line = 1;
  while (pos < text.size()) {
    ++line;
    auto rec = csv_record(text, pos);
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != 2) throw Error(Errc::kIo, "csv", "line " + std::to_string(line) + ": expected 2 fields");
    out.push_back({std::move(rec[0]), std::move(rec[1])});
  }
  return out;
}

void write_csv(const std::string& path, const std::vector<SamplePair>& pairs) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::kIo, path, "cannot open for writing");
  f << to_csv(pairs);
  if (!f) throw Error(Errc::kIo, path, "write failed");
}

std::vector<SamplePair> read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::kIo, path, "cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

std::vector<SamplePair> build_context(const std::vector<SamplePair>& pairs, std::size_t history_len) {
  if (pairs.size() < history_len + 1)
    throw Error(Errc::kInsufficientHistory, "context_len",
                std::to_string(pairs.size()) + " pairs cannot fill a window of " + std::to_string(history_len + 1));
  std::vector<SamplePair> out;
  out.reserve(pairs.size() - history_len);
  for (std::size_t i = history_len; i < pairs.size(); ++i) {
    std::string src;
    for (std::size_t j = i - history_len; j < i; ++j) src += pairs[j].source_text + ":" + pairs[j].target_text + "|";
    src += pairs[i].source_text + ":";
    out.push_back({std::move(src), pairs[i].target_text});
  }
  return out;
}

ContextView unframe(std::string_view source_text) {
  ContextView view;
  std::size_t start = 0;
  for (;;) {
    const auto bar = source_text.find('|', start);
    const auto part = source_text.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start);
    const auto colon = part.find(':');
    if (colon == std::string_view::npos || part.find(':', colon + 1) != std::string_view::npos)
      throw Error(Errc::kBadRequest, "source_text", "window element without a single ':'");
    if (bar == std::string_view::npos) {
      if (colon + 1 != part.size()) throw Error(Errc::kBadRequest, "source_text", "query must end with ':'");
      view.query = std::string(part.substr(0, colon));
      if (view.query.empty()) throw Error(Errc::kBadRequest, "source_text", "empty query");
      return view;
    }
    view.history.push_back({std::string(part.substr(0, colon)), std::string(part.substr(colon + 1))});
    start = bar + 1;
  }
}

DatasetSplit split_dataset(std::vector<SamplePair> pairs, const std::array<double, 3>& ratios, Rng& rng) {
  rng.shuffle(pairs.begin(), pairs.end());
  const std::size_t n = pairs.size();
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[1] + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[2] + 1e-9));
  const std::size_t n_train = n - n_val - n_test;
  DatasetSplit s;
  s.train.assign(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(pairs.begin() + static_cast<std::ptrdiff_t>(n_train),
               pairs.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(pairs.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), pairs.end());
  return s;
}

}  // namespace plcmimic
