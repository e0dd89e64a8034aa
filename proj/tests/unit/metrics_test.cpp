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

#include <gtest/gtest.h>

#include "address_range.hpp"
#include "corrupt.hpp"
#include "plcmimic/datagen.hpp"
#include "plcmimic/error.hpp"
#include "plcmimic/metrics.hpp"
#include "plcmimic/responder.hpp"

#include <json.hpp>

namespace plcmimic {
namespace {

const ProtocolConfig& modbus_cfg() {
  static const auto cfg = parse_config(R"({"val_high":60000})");
  return cfg;
}

const ProtocolConfig& s7_cfg() {
  static const auto cfg = parse_config(R"({"protocol":"s7comm","val_high":60000})");
  return cfg;
}

TEST(Bca, CanonicalEquality) {
  EXPECT_TRUE(bca("00AB", "00ab"));
  EXPECT_FALSE(bca("00ab", "00ac"));
  EXPECT_FALSE(bca("zz", "zz"));
  EXPECT_FALSE(bca("", "00"));
}

TEST(AddressRange, VerdictsMatchTheTable) {
  for (const auto& row : testing::kAddressRangeRows) {
    auto v = testing::address_range_verdict(row);
    EXPECT_EQ(v.got, row.expected) << "read " << row.address << (row.model_exception ? " exc" : " val");
  }
  auto v = testing::address_range_verdict(testing::kAddressRangeRows[0]);
  EXPECT_EQ(v.d1, "000100000003018302");
  EXPECT_EQ(v.d2, "0001000000050103020000");
}

TEST(Rva, ModbusReasons) {
  const auto& cfg = modbus_cfg();
  const std::string read = "000100000006010300000002";
  EXPECT_TRUE(rva(cfg, read, "00010000000701030400010002").valid);
  auto reason = [&](const std::string& req, const std::string& pred) { return rva(cfg, req, pred).reason; };
  EXPECT_EQ(reason(read, "zz"), "not_hex");
  EXPECT_EQ(reason(read, ""), "empty");
  EXPECT_EQ(reason("0001", "00"), "request_undecodable");
  EXPECT_EQ(reason(read, "0001000000070103040001"), "framing");
  EXPECT_EQ(reason(read, "00010001000701030400010002"), "protocol_id");
  EXPECT_EQ(reason(read, "00020000000701030400010002"), "transaction_id");
  EXPECT_EQ(reason(read, "00010000000702030400010002"), "unit_id");
  EXPECT_EQ(reason(read, "000100000003018302"), "unexpected_exception");
  EXPECT_EQ(reason(read, "00010000000701040400010002"), "function_code");
  EXPECT_EQ(reason(read, "0001000000050103020001"), "shape");
  EXPECT_EQ(reason(read, "000100000007010304ffff0002"), "value_range");

  const std::string bad_addr = "000100000006010300270002";
  EXPECT_TRUE(rva(cfg, bad_addr, "000100000003018302").valid);
  EXPECT_EQ(reason(bad_addr, "00010000000701030400010002"), "missing_exception");
  EXPECT_EQ(reason(bad_addr, "000100000003018303"), "exception_code");
  EXPECT_EQ(reason(bad_addr, "000100000003018402"), "function_code");
  EXPECT_EQ(reason(bad_addr, "00010000000401830200"), "length");

  const std::string coils = "000100000006010100000003";
  EXPECT_TRUE(rva(cfg, coils, "00010000000401010105").valid);
  EXPECT_EQ(reason(coils, "0001000000040101010d"), "padding");

  const std::string write1 = "00020000000601050005ff00";
  EXPECT_TRUE(rva(cfg, write1, write1).valid);
  EXPECT_EQ(reason(write1, "000200000006010500050000"), "echo");
  EXPECT_EQ(reason(write1, "00020000000601050006ff00"), "echo");
  const std::string write_n = "00050000000b0110000a0002040001ffff";
  // 0xffff is above val_high
  EXPECT_TRUE(rva(cfg, write_n, "000500000003019003").valid);

  const std::string unsupported = "002a0000000411070000";
  EXPECT_TRUE(rva(cfg, unsupported, "002a00000003118701").valid);
}

TEST(Rva, S7Reasons) {
  const auto& cfg = s7_cfg();
  const auto read = to_hex(build_request(Protocol::kS7Comm, 6, 0, {Access::kRead, DataKind::kAnalog, 0, 2, {}, false}));
  EXPECT_TRUE(rva(cfg, read, "0300001d02f0803203000000060002000800000401ff04002003e80005").valid);
  auto reason = [&](const std::string& req, const std::string& pred) { return rva(cfg, req, pred).reason; };
  EXPECT_EQ(reason(read, "0300001d02f0803203000000070002000800000401ff04002003e80005"), "pdu_ref");
  EXPECT_EQ(reason(read, "0300001d02f0803201000000060002000800000401ff04002003e80005"), "decode");
  EXPECT_EQ(reason(read, "0300001b02f0803203000000060002000600000401ff04001003e8"), "shape");
  EXPECT_EQ(reason(read, "0300001d02f0803203000000060002000800000401ff040020ffff0005"), "value_range");
  EXPECT_EQ(reason(read, "0300001902f080320300000006000200040000040105000000"), "unexpected_exception");

  const auto oob = to_hex(build_request(Protocol::kS7Comm, 9, 0, {Access::kRead, DataKind::kAnalog, 40, 1, {}, false}));
  EXPECT_TRUE(rva(cfg, oob, "0300001902f080320300000009000200040000040105000000").valid);
  EXPECT_EQ(reason(oob, "0300001902f08032030000000900020004000004010a000000"), "exception_code");
  EXPECT_EQ(reason(oob, "0300001902f080320300000009000200040000040105040000"), "shape");
  EXPECT_EQ(reason(oob, "0300001b02f0803203000000090002000600000401ff04001003e8"), "missing_exception");

  auto restricted = parse_config(R"({"protocol":"s7comm","functions":[3]})");
  const auto wbit = to_hex(build_request(Protocol::kS7Comm, 5, 0, {Access::kWrite, DataKind::kDigital, 3, 0, {1}, false}));
  const auto req = parse_request(Protocol::kS7Comm, from_hex(wbit));
  const auto fn_exc = to_hex(build_response(req, {OutcomeType::kException, kExcIllegalFunction, {}}));
  EXPECT_TRUE(rva(restricted, wbit, fn_exc).valid);
  EXPECT_EQ(rva(restricted, wbit, "0300001602f0803203000000050002000100000501ff").reason, "missing_exception");
  EXPECT_EQ(rva(cfg, wbit, fn_exc).reason, "unexpected_exception");
}

TEST(RvaEps, Tolerance) {
  const auto& cfg = modbus_cfg();
  const std::string read = "000100000006010300000002";
  const std::string ref = "00010000000701030400640002";
  const std::string near = "00010000000701030400660002";
  EXPECT_FALSE(rva_eps(cfg, read, near, ref, 0));
  EXPECT_FALSE(rva_eps(cfg, read, near, ref, 1));
  EXPECT_TRUE(rva_eps(cfg, read, near, ref, 2));
  EXPECT_TRUE(rva_eps(cfg, read, near, ref, 100));
  EXPECT_FALSE(rva_eps(cfg, read, "000100000003018302", ref, 100));

  const std::string coils = "000100000006010100000003";
  EXPECT_FALSE(rva_eps(cfg, coils, "00010000000401010104", "00010000000401010105", 1000000));
  EXPECT_TRUE(rva_eps(cfg, coils, "00010000000401010105", "00010000000401010105", 0));
}

TEST(MetricOrdering, RandomCorruptionsOfOracleResponses) {
  const std::vector<std::uint32_t> eps{0, 1, 2, 5, 10, 100};
  for (const auto* cfg : {&modbus_cfg(), &s7_cfg()}) {
    GenOptions opts;
    opts.seed = 3;
    auto pairs = generate_dataset(*cfg, opts).pairs;
    Rng rng(77);
    testing::OrderingCheck check;
    for (int round = 0; round < 2; ++round)
      for (const auto& p : pairs)
        testing::check_ordering(*cfg, p.source_text, testing::corrupt(*cfg, p.source_text, p.target_text, rng),
                                p.target_text, eps, check);
    EXPECT_EQ(check.violations, 0u) << check.first_violation;
    EXPECT_GT(check.shape_matched, check.samples / 5);
  }
}

TEST(Score, CountsAndFailures) {
  const auto& cfg = modbus_cfg();
  std::vector<SamplePair> records{{"000100000006010300000001", "0001000000050103020064"},
                                  {"000200000006010300000001", "0002000000050103020064"},
                                  {"000300000006010300000001", "0003000000050103020064"},
                                  {"000400000006010300000001", "0004000000050103020064"}};
  std::vector<std::string> preds{"0001000000050103020064", "0002000000050103020065", "000300000003018302", "zz"};
  auto m = score(cfg, records, preds, {0, 1});
  EXPECT_EQ(m.n, 4u);
  EXPECT_DOUBLE_EQ(m.bca, 0.25);
  EXPECT_DOUBLE_EQ(m.rva, 0.5);
  EXPECT_DOUBLE_EQ(m.rva_eps.at(0), 0.25);
  EXPECT_DOUBLE_EQ(m.rva_eps.at(1), 0.5);
  EXPECT_EQ(m.failures.at("unexpected_exception"), 1u);
  EXPECT_EQ(m.failures.at("not_hex"), 1u);
  EXPECT_THROW(score(cfg, records, {}, {}), Error);

  auto j = nlohmann::json::parse(m.to_json());
  EXPECT_EQ(j["n"], 4);
  EXPECT_DOUBLE_EQ(j["rva_eps"]["1"].get<double>(), 0.5);
  EXPECT_EQ(m.curve_csv(), "eps,rva_eps\n0,0.250000\n1,0.500000\n");
}

TEST(Score, ContextWindowsScoreTheQuery) {
  const auto& cfg = modbus_cfg();
  std::vector<SamplePair> records{{"000100000006010600000064:000100000006010600000064|000200000006010300000001:",
                                   "0002000000050103020064"}};
  auto m = score(cfg, records, {"0002000000050103020064"}, {0});
  EXPECT_DOUBLE_EQ(m.rva, 1.0);
  EXPECT_EQ(query_of(records[0].source_text), "000200000006010300000001");
  EXPECT_EQ(query_of("000200000006010300000001"), "000200000006010300000001");
}

TEST(Evaluate, OracleClosesTheLoop) {
  for (const auto* cfg : {&modbus_cfg(), &s7_cfg()}) {
    GenOptions opts;
    opts.seed = 8;
    auto pairs = generate_dataset(*cfg, opts).pairs;
    OracleResponder oracle(std::make_shared<Plant>(*cfg), false);
    auto m = evaluate(*cfg, pairs, oracle, {0, 5});
    EXPECT_DOUBLE_EQ(m.bca, 1.0);
    EXPECT_DOUBLE_EQ(m.rva, 1.0);
    EXPECT_DOUBLE_EQ(m.rva_eps.at(0), 1.0);
    EXPECT_EQ(m.responder_errors, 0u);
  }
}

TEST(Evaluate, ShuffledContextWindowsWithReplay) {
  const auto& cfg = modbus_cfg();
  GenOptions opts;
  auto windows = build_context(generate_dataset(cfg, opts).pairs, 1);
  Rng rng(4);
  auto split = split_dataset(windows, {0.8, 0.1, 0.1}, rng);
  OracleResponder oracle(std::make_shared<Plant>(cfg), true);
  auto m = evaluate(cfg, split.test, oracle, {0});
  EXPECT_DOUBLE_EQ(m.bca, 1.0);
  EXPECT_DOUBLE_EQ(m.rva, 1.0);
}

class Silent : public Responder {
 public:
  std::string respond(const std::string&, std::chrono::milliseconds) override {
    throw Error(Errc::kResponderTimeout, "model", "no answer");
  }
  std::string name() const override { return "silent"; }
};

TEST(Evaluate, ResponderErrorsScoreAsWrong) {
  Silent silent;
  std::vector<SamplePair> records{{"000100000006010300000001", "0001000000050103020064"}};
  auto m = evaluate(modbus_cfg(), records, silent, {0});
  EXPECT_EQ(m.responder_errors, 1u);
  EXPECT_DOUBLE_EQ(m.rva, 0.0);
  EXPECT_EQ(m.failures.at("empty"), 1u);
}

TEST(Responders, Factory) {
  auto cfg = parse_config("{}");
  EXPECT_EQ(make_responder("oracle", cfg, true)->name(), "oracle");
  EXPECT_EQ(make_responder("model:127.0.0.1:9", cfg, true)->name(), "model");
  EXPECT_THROW(make_responder("gpt", cfg, true), Error);
  EXPECT_THROW(make_responder("model:nohost", cfg, true), Error);
}

}  // namespace
}  // namespace plcmimic
