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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <sys/socket.h>

#include <json.hpp>

#include "plcmimic/error.hpp"
#include "plcmimic/honeypot.hpp"
#include "plcmimic/logsink.hpp"
#include "plcmimic/modbus.hpp"
#include "plcmimic/net.hpp"
#include "plcmimic/plant_server.hpp"
#include "plcmimic/responder.hpp"
#include "plcmimic/s7comm.hpp"
#include "plcmimic/wire.hpp"

namespace plcmimic {
namespace {

namespace fs = std::filesystem;
using namespace std::chrono_literals;

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::path(::testing::TempDir()) / ("plcmimic_net_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::vector<nlohmann::json> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

net::Endpoint local(std::uint16_t port) { return {"127.0.0.1", port}; }

// Sends one frame and waits for one reply frame.
std::optional<Bytes> exchange(net::Socket& sock, Protocol protocol, const Bytes& request,
                              std::chrono::milliseconds timeout = 2000ms) {
  sock.send_all(request);
  net::FrameReader reader(sock, protocol);
  Bytes frame;
  if (reader.next(frame, timeout) != net::FrameReader::Status::kFrame) return std::nullopt;
  return frame;
}

TEST(Wire, EncodeLine) {
  EXPECT_EQ(wire::encode_line("abc"), "3 abc\n");
  EXPECT_EQ(wire::encode_line(""), "0 \n");
  EXPECT_EQ(wire::encode_line("a b\nc"), "5 a b\nc\n");
}

TEST(Wire, TakeLineIncrementally) {
  std::string buf;
  const std::string stream = wire::encode_line("0001:0002|0003:") + wire::encode_line("") + wire::encode_line("x");
  std::vector<std::string> got;
  for (char c : stream) {
    buf.push_back(c);
    while (auto line = wire::take_line(buf)) got.push_back(*line);
  }
  EXPECT_EQ(got, (std::vector<std::string>{"0001:0002|0003:", "", "x"}));
  EXPECT_TRUE(buf.empty());
}

TEST(Wire, TakeLineRejectsBadFraming) {
  for (std::string bad : {"x 1\n", " abc\n", "3 abcd\n", "123456789 a", "2a b\n", "999999999"}) {
    std::string buf = bad;
    EXPECT_THROW(wire::take_line(buf), Error) << bad;
  }
  std::string big = "2000000 ";
  EXPECT_THROW(wire::take_line(big), Error);
}

TEST(Wire, ClientServerRoundTrip) {
  wire::Server server("127.0.0.1", 0, [](const std::string& p) { return "echo:" + p; });
  server.start();
  wire::ModelClient client(local(server.port()));
  EXPECT_EQ(client.query("000100000006010300000001", 1000ms), "echo:000100000006010300000001");
  EXPECT_EQ(client.query("", 1000ms), "echo:");
  EXPECT_EQ(client.query("line\nbreak", 1000ms), "echo:line\nbreak");
  server.stop();
}

TEST(Wire, ClientTimesOutAndRecovers) {
  std::atomic<int> calls{0};
  wire::Server server("127.0.0.1", 0, [&](const std::string& p) {
    if (calls++ == 0) std::this_thread::sleep_for(400ms);
    return p;
  });
  server.start();
  wire::ModelClient client(local(server.port()));
  try {
    client.query("slow", 100ms);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kResponderTimeout);
  }
  // A fresh connection must not see the late answer to "slow".
  EXPECT_EQ(client.query("fast", 1000ms), "fast");
  server.stop();
}

TEST(Wire, ClientReportsLostConnection) {
  net::TcpServer closer("127.0.0.1", 0, [](net::Socket& s, const std::string&) { s.close(); });
  closer.start();
  wire::ModelClient client(local(closer.port()));
  try {
    client.query("x", 1000ms);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kConnectionLost);
  }
  closer.stop();
}

TEST(Wire, ModelResponderConcurrentCallers) {
  wire::Server server("127.0.0.1", 0, [](const std::string& p) {
    std::this_thread::sleep_for(5ms);
    return "r" + p;
  });
  server.start();
  ModelResponder responder(local(server.port()));
  EXPECT_EQ(responder.name(), "model");
  std::atomic<int> bad{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&, t] {
      for (int i = 0; i < 20; ++i) {
        const std::string q = std::to_string(t) + "_" + std::to_string(i);
        if (responder.respond(q, 2000ms) != "r" + q) ++bad;
      }
    });
  for (auto& th : threads) th.join();
  EXPECT_EQ(bad.load(), 0);
  server.stop();
}

TEST(Net, ParseEndpoint) {
  auto ep = net::parse_endpoint("127.0.0.1:502");
  EXPECT_EQ(ep.host, "127.0.0.1");
  EXPECT_EQ(ep.port, 502);
  EXPECT_EQ(ep.str(), "127.0.0.1:502");
  EXPECT_EQ(net::parse_endpoint("[::1]:102").port, 102);
  for (const char* bad : {"", "host", "host:", ":1", "h:70000", "h:abc"}) EXPECT_THROW(net::parse_endpoint(bad), Error) << bad;
}

TEST(PlantServer, ServesAndCaptures) {
  const auto dir = scratch_dir("capture");
  const auto log = dir / "capture.jsonl";
  auto cfg = parse_config("{}");
  PlantServer server(std::make_shared<Plant>(cfg), "127.0.0.1", 0, log.string());
  server.start();
  auto sock = net::connect_tcp(local(server.port()), 1000ms);
  const Bytes write = from_hex("00010000000601060003007b");
  const Bytes read = from_hex("000200000006010300030001");
  ASSERT_EQ(exchange(sock, Protocol::kModbus, write), write);
  ASSERT_EQ(to_hex(*exchange(sock, Protocol::kModbus, read)), "00020000000501030200" "7b");
  sock.close();
  server.stop();

  const auto records = read_jsonl(log);
  ASSERT_EQ(records.size(), 4u);
  const char* dirs[] = {"in", "out", "in", "out"};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(records[i]["dir"], dirs[i]);
    EXPECT_TRUE(parse_iso_timestamp(records[i]["ts"]).has_value());
    EXPECT_EQ(records[i]["peer"].get<std::string>().rfind("127.0.0.1:", 0), 0u);
  }
  EXPECT_EQ(records[2]["hex"], to_hex(read));
}

TEST(PlantServer, MalformedFrameIsDropped) {
  const auto dir = scratch_dir("malformed");
  const auto log = dir / "capture.jsonl";
  PlantServer server(std::make_shared<Plant>(parse_config("{}")), "127.0.0.1", 0, log.string());
  server.start();
  auto sock = net::connect_tcp(local(server.port()), 1000ms);
  const Bytes junk = from_hex("000100000000ff");  // MBAP length 0
  sock.send_all(junk);
  std::uint8_t buf[64];
  const auto n = sock.recv_some(buf, 2000ms);
  ASSERT_TRUE(n.has_value());
  EXPECT_EQ(*n, 0u);  // server hung up
  server.stop();
  const auto records = read_jsonl(log);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0]["dir"], "drop");
}

TEST(PlantServer, InterleavedClientsShareState) {
  auto plant = std::make_shared<Plant>(parse_config("{}"));
  PlantServer server(plant, "127.0.0.1", 0);
  server.start();
  auto a = net::connect_tcp(local(server.port()), 1000ms);
  auto b = net::connect_tcp(local(server.port()), 1000ms);
  for (int i = 0; i < 50; ++i) {
    Bytes w = from_hex("000000000006010600050000");
    w[1] = static_cast<std::uint8_t>(i);
    w[11] = static_cast<std::uint8_t>(i);
    ASSERT_EQ(exchange(a, Protocol::kModbus, w), w);
    const auto r = exchange(b, Protocol::kModbus, from_hex("000900000006010300050001"));
    ASSERT_TRUE(r);
    EXPECT_EQ((*r)[10], i);
  }
  server.stop();
}

TEST(PlantServer, S7Session) {
  auto cfg = parse_config(R"({"protocol":"s7comm"})");
  PlantServer server(std::make_shared<Plant>(cfg), "127.0.0.1", 0);
  server.start();
  auto sock = net::connect_tcp(local(server.port()), 1000ms);
  auto cc = exchange(sock, Protocol::kS7Comm, from_hex("0300001611e00000000100c1020100c2020101c0010a"));
  ASSERT_TRUE(cc);
  EXPECT_EQ((*cc)[5], 0xd0);
  auto setup = exchange(sock, Protocol::kS7Comm, from_hex("0300001902f08032010000000100080000f0000001000101e0"));
  ASSERT_TRUE(setup);
  EXPECT_EQ(to_hex(*setup), "0300001b02f080320300000001000800000000f0000001000101e0");
  server.stop();
}

// A model that answers like the plant, optionally after a delay.
struct MockModel {
  explicit MockModel(const ProtocolConfig& cfg, std::chrono::milliseconds delay = 0ms)
      : plant(std::make_shared<Plant>(cfg)),
        oracle(plant, false),
        server("127.0.0.1", 0, [this, delay](const std::string& p) {
          {
            std::lock_guard lock(mu);
            payloads.push_back(p);
          }
          std::this_thread::sleep_for(delay);
          if (!reply_override.empty()) return reply_override;
          return oracle.respond(p, 1000ms);
        }) {
    server.start();
  }
  ~MockModel() { server.stop(); }
  std::shared_ptr<Plant> plant;
  OracleResponder oracle;
  std::mutex mu;
  std::vector<std::string> payloads;
  std::string reply_override;
  wire::Server server;
};

HoneypotOptions test_options(const fs::path& log_dir, std::chrono::milliseconds deadline,
                             FallbackPolicy fallback = FallbackPolicy::kException) {
  HoneypotOptions o;
  o.host = "127.0.0.1";
  o.deadline = deadline;
  o.fallback = fallback;
  o.log_dir = log_dir.string();
  return o;
}

TEST(Honeypot, OracleMatchesPlantByteForByte) {
  auto cfg = parse_config("{}");
  PlantServer plant_srv(std::make_shared<Plant>(cfg), "127.0.0.1", 0);
  plant_srv.start();
  Honeypot pot(cfg, std::make_shared<OracleResponder>(std::make_shared<Plant>(cfg), false), test_options({}, 1000ms),
               true);
  pot.start();
  auto a = net::connect_tcp(local(plant_srv.port()), 1000ms);
  auto b = net::connect_tcp(local(pot.port()), 1000ms);
  const char* requests[] = {"000100000006010300000003", "00020000000601060001abcd", "000300000006010300000003",
                            "000400000006010100000010", "0005000000090110000000010200ff", "000600000006010500070000",
                            "000700000006014100000001", "000800000006010300270002"};
  for (const char* hex : requests) {
    const auto ra = exchange(a, Protocol::kModbus, from_hex(hex));
    const auto rb = exchange(b, Protocol::kModbus, from_hex(hex));
    ASSERT_TRUE(ra && rb) << hex;
    EXPECT_EQ(to_hex(*ra), to_hex(*rb)) << hex;
  }
  pot.stop();
  plant_srv.stop();
}

TEST(Honeypot, ModelAnswersAndContextIsForwarded) {
  auto cfg = parse_config(R"({"context_len":1})");
  const auto dir = scratch_dir("model");
  MockModel model(cfg);
  Honeypot pot(cfg, std::make_shared<ModelResponder>(local(model.server.port())), test_options(dir, 1000ms), true);
  pot.start();
  auto sock = net::connect_tcp(local(pot.port()), 1000ms);
  const std::string q1 = "00010000000601060002002a", q2 = "000200000006010300020001";
  const auto r1 = exchange(sock, Protocol::kModbus, from_hex(q1));
  const auto r2 = exchange(sock, Protocol::kModbus, from_hex(q2));
  ASSERT_TRUE(r1 && r2);
  EXPECT_EQ(to_hex(*r1), q1);
  EXPECT_EQ(to_hex(*r2), "000200000005010302002a");
  pot.stop();
  ASSERT_EQ(model.payloads.size(), 2u);
  EXPECT_EQ(model.payloads[0], q1 + ":");
  EXPECT_EQ(model.payloads[1], q1 + ":" + q1 + "|" + q2 + ":");

  const auto records = read_jsonl(dir / "interactions.jsonl");
  ASSERT_EQ(records.size(), 4u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const char* key : {"ts", "peer", "dir", "hex", "latency_us", "responder", "seq"})
      EXPECT_TRUE(records[i].contains(key)) << key;
    EXPECT_EQ(records[i]["seq"], i);
    EXPECT_EQ(records[i]["responder"], "model");
  }
  EXPECT_EQ(records[1]["dir"], "out");
  EXPECT_GE(records[1]["latency_us"].get<std::int64_t>(), 0);
}

TEST(Honeypot, LateModelFallsBackToException) {
  auto cfg = parse_config("{}");
  const auto dir = scratch_dir("late");
  MockModel model(cfg, 300ms);
  Honeypot pot(cfg, std::make_shared<ModelResponder>(local(model.server.port())), test_options(dir, 80ms), true);
  pot.start();
  auto sock = net::connect_tcp(local(pot.port()), 1000ms);
  const auto r = exchange(sock, Protocol::kModbus, from_hex("000700000006010300000001"));
  ASSERT_TRUE(r);
  EXPECT_EQ(to_hex(*r), "000700000003018304");
  pot.stop();
  const auto records = read_jsonl(dir / "interactions.jsonl");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1]["responder"], "fallback");
}

TEST(Honeypot, GarbageModelReplyFallsBack) {
  auto cfg = parse_config("{}");
  MockModel model(cfg);
  model.reply_override = "not hex";
  Honeypot pot(cfg, std::make_shared<ModelResponder>(local(model.server.port())), test_options({}, 1000ms), true);
  pot.start();
  auto sock = net::connect_tcp(local(pot.port()), 1000ms);
  const auto r = exchange(sock, Protocol::kModbus, from_hex("000700000006010100000001"));
  ASSERT_TRUE(r);
  EXPECT_EQ(to_hex(*r), "000700000003018104");
  pot.stop();
}

TEST(Honeypot, DropPolicyStaysSilent) {
  auto cfg = parse_config("{}");
  const auto dir = scratch_dir("drop");
  MockModel model(cfg, 300ms);
  Honeypot pot(cfg, std::make_shared<ModelResponder>(local(model.server.port())),
               test_options(dir, 50ms, FallbackPolicy::kDrop), true);
  pot.start();
  auto sock = net::connect_tcp(local(pot.port()), 1000ms);
  EXPECT_FALSE(exchange(sock, Protocol::kModbus, from_hex("000700000006010300000001"), 500ms));
  pot.stop();
  const auto records = read_jsonl(dir / "interactions.jsonl");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1]["dir"], "drop");
}

TEST(Honeypot, S7HandshakeIsAnsweredLocally) {
  auto cfg = parse_config(R"({"protocol":"s7comm"})");
  const auto dir = scratch_dir("s7");
  MockModel model(cfg);
  Honeypot pot(cfg, std::make_shared<ModelResponder>(local(model.server.port())), test_options(dir, 1000ms), true);
  pot.start();
  auto sock = net::connect_tcp(local(pot.port()), 1000ms);
  ASSERT_TRUE(exchange(sock, Protocol::kS7Comm, from_hex("0300001611e00000000100c1020100c2020101c0010a")));
  ASSERT_TRUE(exchange(sock, Protocol::kS7Comm, from_hex("0300001902f08032010000000100080000f0000001000101e0")));
  const auto r = exchange(sock, Protocol::kS7Comm, from_hex("0300001f02f080320100000004000e00000401120a10010001000184000003"));
  ASSERT_TRUE(r);
  EXPECT_EQ(to_hex(*r), "0300001a02f0803203000000040002000500000401ff03000100");
  pot.stop();
  EXPECT_EQ(model.payloads.size(), 1u);
  const auto records = read_jsonl(dir / "interactions.jsonl");
  ASSERT_EQ(records.size(), 6u);
  EXPECT_EQ(records[1]["responder"], "oracle");
  EXPECT_EQ(records[3]["responder"], "oracle");
  EXPECT_EQ(records[5]["responder"], "model");
}

TEST(Honeypot, EmptyModelReplyFallsBack) {
  auto cfg = parse_config("{}");
  MockModel model(cfg);
  model.reply_override = " ";
  Honeypot pot(cfg, std::make_shared<ModelResponder>(local(model.server.port())), test_options({}, 1000ms), true);
  pot.start();
  auto sock = net::connect_tcp(local(pot.port()), 1000ms);
  const auto r = exchange(sock, Protocol::kModbus, from_hex("000700000006010300000001"));
  ASSERT_TRUE(r);
  EXPECT_EQ(to_hex(*r), "000700000003018304");
  pot.stop();
}

TEST(Honeypot, ConcurrentClientsAreAccounted) {
  auto cfg = parse_config("{}");
  const auto dir = scratch_dir("concurrent");
  const auto deadline = 1000ms;
  Honeypot pot(cfg, std::make_shared<OracleResponder>(std::make_shared<Plant>(cfg), false), test_options(dir, deadline),
               true);
  pot.start();
  std::atomic<int> unanswered{0};
  std::vector<std::thread> clients;
  for (int c = 0; c < 50; ++c)
    clients.emplace_back([&, c] {
      auto sock = net::connect_tcp(local(pot.port()), 2000ms);
      for (int i = 0; i < 100; ++i) {
        Bytes req = from_hex("000000000006010300000001");
        req[0] = static_cast<std::uint8_t>(c);
        req[1] = static_cast<std::uint8_t>(i);
        const auto r = exchange(sock, Protocol::kModbus, req);
        if (!r || (*r)[0] != c || (*r)[1] != i) ++unanswered;
      }
    });
  for (auto& t : clients) t.join();
  pot.stop();
  EXPECT_EQ(unanswered.load(), 0);

  const auto records = read_jsonl(dir / "interactions.jsonl");
  ASSERT_EQ(records.size(), 10000u);
  std::size_t in = 0, out = 0;
  std::set<std::string> peers;
  std::vector<bool> seen(records.size(), false);
  for (const auto& r : records) {
    const auto dir_name = r["dir"].get<std::string>();
    in += dir_name == "in";
    out += dir_name == "out";
    peers.insert(r["peer"].get<std::string>());
    const auto seq = r["seq"].get<std::size_t>();
    ASSERT_LT(seq, seen.size());
    EXPECT_FALSE(seen[seq]);
    seen[seq] = true;
    if (dir_name == "out")
      EXPECT_LE(r["latency_us"].get<std::int64_t>(),
                std::chrono::duration_cast<std::chrono::microseconds>(deadline).count());
  }
  EXPECT_EQ(in, 5000u);
  EXPECT_EQ(out, 5000u);
  EXPECT_EQ(peers.size(), 50u);
}

TEST(Honeypot, RestartAppendsToTheSameLog) {
  auto cfg = parse_config("{}");
  const auto dir = scratch_dir("restart");
  for (int run = 0; run < 2; ++run) {
    Honeypot pot(cfg, std::make_shared<OracleResponder>(std::make_shared<Plant>(cfg), false),
                 test_options(dir, 1000ms), true);
    pot.start();
    auto sock = net::connect_tcp(local(pot.port()), 1000ms);
    ASSERT_TRUE(exchange(sock, Protocol::kModbus, from_hex("000100000006010300000001")));
    pot.stop();
  }
  EXPECT_EQ(read_jsonl(dir / "interactions.jsonl").size(), 4u);
}

TEST(Honeypot, ResetMidRequestLogsDrop) {
  auto cfg = parse_config("{}");
  const auto dir = scratch_dir("reset");
  MockModel model(cfg, 200ms);
  Honeypot pot(cfg, std::make_shared<ModelResponder>(local(model.server.port())), test_options(dir, 1000ms), true);
  pot.start();
  {
    auto sock = net::connect_tcp(local(pot.port()), 1000ms);
    sock.send_all(from_hex("000100000006010300000001"));
    std::this_thread::sleep_for(50ms);
    linger lg{1, 0};  // close with RST
    ::setsockopt(sock.fd(), SOL_SOCKET, SO_LINGER, &lg, sizeof(lg));
  }
  std::this_thread::sleep_for(400ms);
  pot.stop();
  const auto records = read_jsonl(dir / "interactions.jsonl");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0]["dir"], "in");
  EXPECT_EQ(records[1]["dir"], "drop");
}

TEST(Honeypot, FallbackResponse) {
  EXPECT_EQ(to_hex(*fallback_response(Protocol::kModbus, from_hex("002a00000006110300000001"))), "002a00000003118304");
  EXPECT_FALSE(fallback_response(Protocol::kModbus, from_hex("0001")));
  const auto s7 = fallback_response(Protocol::kS7Comm,
                                    from_hex("0300001f02f080320100000002000e00000401120a10040001000184000000"));
  ASSERT_TRUE(s7);
  const auto frame = s7::decode(*s7);
  EXPECT_EQ(frame.error_class, 0x83);
  EXPECT_EQ(frame.error_code, 0x04);
}

TEST(Logs, Percentile) {
  EXPECT_EQ(percentile({}, 50), 0.0);
  EXPECT_EQ(percentile({7}, 99), 7.0);
  EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 50), 2.5);
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4, 5}, 90), 4.6);
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4, 5}, 100), 5.0);
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4, 5}, 0), 1.0);
}

TEST(Logs, Summarize) {
  const auto dir = scratch_dir("summary");
  std::ofstream(dir / "interactions.jsonl")
      << R"({"ts":"2026-01-01T00:00:01.000000Z","peer":"10.0.0.1:5000","dir":"in","hex":"00","latency_us":0,"responder":"model","seq":0})"
      << "\n"
      << R"({"ts":"2026-01-01T00:00:01.001000Z","peer":"10.0.0.1:5000","dir":"out","hex":"00","latency_us":100,"responder":"model","seq":1})"
      << "\n"
      << "not json\n\n"
      << R"({"ts":"2026-01-01T00:00:03.000000Z","peer":"10.0.0.1:5001","dir":"in","hex":"00","latency_us":0,"responder":"model","seq":2})"
      << "\n"
      << R"({"ts":"2026-01-01T00:00:03.300000Z","peer":"10.0.0.1:5001","dir":"out","hex":"00","latency_us":300,"responder":"fallback","seq":3})"
      << "\n"
      << R"({"ts":"2026-01-01T00:00:00.500000Z","peer":"[::1]:7","dir":"drop","hex":"00","latency_us":0,"responder":"none","seq":4})"
      << "\n";
  const auto s = summarize_logs(dir.string());
  EXPECT_EQ(s["malformed_lines"], 1);
  const auto& a = s["ips"]["10.0.0.1"];
  EXPECT_EQ(a["requests"], 2);
  EXPECT_EQ(a["responses"], 2);
  EXPECT_EQ(a["connections"], 2);
  EXPECT_EQ(a["first_seen"], "2026-01-01T00:00:01.000000Z");
  EXPECT_EQ(a["last_seen"], "2026-01-01T00:00:03.300000Z");
  EXPECT_DOUBLE_EQ(a["latency"]["p50_us"].get<double>(), 200.0);
  EXPECT_EQ(s["ips"]["::1"]["drops"], 1);
  EXPECT_EQ(s["by_responder"]["fallback"]["count"], 1);
  EXPECT_DOUBLE_EQ(s["latency"]["max_us"].get<double>(), 300.0);
  EXPECT_THROW(summarize_logs((dir / "missing.jsonl").string()), Error);
  std::ofstream(dir / "empty.jsonl").flush();
  const auto empty = summarize_logs((dir / "empty.jsonl").string());
  EXPECT_TRUE(empty["ips"].empty());
  EXPECT_EQ(empty["latency"]["count"], 0);
}

TEST(Logs, IsoTimestampRoundTrip) {
  const auto t = std::chrono::system_clock::time_point(std::chrono::microseconds(1700000000123456));
  EXPECT_EQ(iso_timestamp(t), "2023-11-14T22:13:20.123456Z");
  EXPECT_EQ(parse_iso_timestamp("2023-11-14T22:13:20.123456Z"), t);
  EXPECT_EQ(parse_iso_timestamp("2023-11-14T22:13:20Z"), t - std::chrono::microseconds(123456));
  EXPECT_FALSE(parse_iso_timestamp("yesterday"));
}

TEST(Logs, SinkWritesFromManyThreads) {
  const auto path = scratch_dir("sink") / "log.jsonl";
  {
    JsonlSink sink(path.string());
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
      threads.emplace_back([&, t] {
        for (int i = 0; i < 250; ++i) sink.write({{"t", t}, {"i", i}});
      });
    for (auto& th : threads) th.join();
    sink.flush();
    EXPECT_FALSE(sink.degraded());
    EXPECT_EQ(read_jsonl(path).size(), 1000u);
  }
}

TEST(Logs, SinkDegradesWhenUnwritable) {
  JsonlSink sink("/nonexistent-dir/x/log.jsonl");
  EXPECT_TRUE(sink.degraded());
  sink.write({{"still", "accepted"}});
  sink.flush();
}

}  // namespace
}  // namespace plcmimic
