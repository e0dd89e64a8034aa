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

// Exercises the library only through the C header.

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include "plcmimic/plcmimic.h"

namespace {

namespace fs = std::filesystem;

const std::string kFixtures = PLCMIMIC_FIXTURE_DIR;

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::path(::testing::TempDir()) / ("plcmimic_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string take(char* s) {
  std::string out = s ? s : "";
  plcm_free(s);
  return out;
}

struct Config {
  explicit Config(const char* json) { EXPECT_EQ(plcm_config_parse(json, &cfg), PLCM_OK) << plcm_last_error(); }
  ~Config() { plcm_config_free(cfg); }
  plcm_config* cfg = nullptr;
};

TEST(CApi, StatusNamesAndVersion) {
  EXPECT_STREQ(plcm_status_name(PLCM_OK), "ok");
  EXPECT_STRNE(plcm_status_name(PLCM_E_TIMEOUT), plcm_status_name(PLCM_E_NETWORK));
  EXPECT_GT(std::strlen(plcm_version()), 0u);
}

TEST(CApi, ConfigParseErrors) {
  plcm_config* cfg = reinterpret_cast<plcm_config*>(0x1);
  EXPECT_EQ(plcm_config_parse(R"({"protocol":"bacnet"})", &cfg), PLCM_E_CONFIG);
  EXPECT_EQ(cfg, nullptr);
  EXPECT_NE(std::string(plcm_last_error()).find("protocol"), std::string::npos);
  EXPECT_EQ(plcm_config_parse("{", &cfg), PLCM_E_CONFIG);
  EXPECT_EQ(plcm_config_parse(nullptr, &cfg), PLCM_E_ARGUMENT);
  EXPECT_EQ(plcm_config_load("/nonexistent/cfg.json", &cfg), PLCM_E_IO);
}

TEST(CApi, LastErrorIsPerThread) {
  plcm_config* cfg = nullptr;
  ASSERT_EQ(plcm_config_parse("[", &cfg), PLCM_E_CONFIG);
  std::string other;
  std::thread([&] { other = plcm_last_error(); }).join();
  EXPECT_EQ(other, "");
  EXPECT_NE(std::string(plcm_last_error()), "");
}

TEST(CApi, ConfigAccessorsAndRoundTrip) {
  Config modbus("{}");
  Config s7(R"({"protocol":"s7comm","context_len":3})");
  EXPECT_EQ(plcm_config_port(modbus.cfg), 502);
  EXPECT_EQ(plcm_config_port(s7.cfg), 102);
  EXPECT_EQ(plcm_config_context_len(s7.cfg), 3u);
  char* json = nullptr;
  ASSERT_EQ(plcm_config_to_json(s7.cfg, &json), PLCM_OK);
  const std::string text = take(json);
  Config again(text.c_str());
  char* json2 = nullptr;
  ASSERT_EQ(plcm_config_to_json(again.cfg, &json2), PLCM_OK);
  EXPECT_EQ(take(json2), text);
}

TEST(CApi, PlantHandle) {
  Config cfg("{}");
  plcm_plant* plant = nullptr;
  ASSERT_EQ(plcm_plant_new(cfg.cfg, &plant), PLCM_OK);
  char* out = nullptr;
  ASSERT_EQ(plcm_plant_handle(plant, "000100000006010600040063", &out), PLCM_OK);
  EXPECT_EQ(take(out), "000100000006010600040063");
  ASSERT_EQ(plcm_plant_handle(plant, "000200000006010300040001", &out), PLCM_OK);
  EXPECT_EQ(take(out), "0002000000050103020063");
  ASSERT_EQ(plcm_plant_handle(plant, "000300000006010300280001", &out), PLCM_OK);
  EXPECT_EQ(take(out), "000300000003018302");
  EXPECT_EQ(plcm_plant_handle(plant, "zz", &out), PLCM_E_DECODE);
  EXPECT_EQ(plcm_plant_handle(nullptr, "00", &out), PLCM_E_ARGUMENT);
  plcm_plant_free(plant);
}

TEST(CApi, Metrics) {
  Config cfg("{}");
  int v = -1;
  ASSERT_EQ(plcm_bca("00010000000501030203e8", "00010000000501030203E8", &v), PLCM_OK);
  EXPECT_EQ(v, 1);
  ASSERT_EQ(plcm_bca("00010000000501030203e9", "00010000000501030203e8", &v), PLCM_OK);
  EXPECT_EQ(v, 0);

  char* reason = nullptr;
  ASSERT_EQ(plcm_rva(cfg.cfg, "000100000006010300000001", "00010000000501030203e9", &v, &reason), PLCM_OK);
  EXPECT_EQ(v, 1);
  EXPECT_EQ(take(reason), "");
  ASSERT_EQ(plcm_rva(cfg.cfg, "000100000006010300000001", "000100000003018302", &v, &reason), PLCM_OK);
  EXPECT_EQ(v, 0);
  EXPECT_NE(take(reason), "");
  ASSERT_EQ(plcm_rva(cfg.cfg, "000100000006010300000001", "0001", &v, nullptr), PLCM_OK);
  EXPECT_EQ(v, 0);

  const char* req = "000100000006010300000001";
  const char* ref = "00010000000501030203e8";
  ASSERT_EQ(plcm_rva_eps(cfg.cfg, req, "00010000000501030203ea", ref, 1, &v), PLCM_OK);
  EXPECT_EQ(v, 0);
  ASSERT_EQ(plcm_rva_eps(cfg.cfg, req, "00010000000501030203ea", ref, 2, &v), PLCM_OK);
  EXPECT_EQ(v, 1);
  // A broken request scores as invalid rather than failing the call.
  ASSERT_EQ(plcm_rva(cfg.cfg, "nothex", ref, &v, &reason), PLCM_OK);
  EXPECT_EQ(v, 0);
  EXPECT_EQ(take(reason), "request_undecodable");
}

TEST(CApi, DatasetPipeline) {
  const auto dir = scratch_dir("pipeline");
  Config cfg(R"({"dataset_size":200})");
  plcm_gen_options opts{};
  opts.seed = 11;
  const std::string out_dir = (dir / "gen").string();
  opts.out_dir = out_dir.c_str();
  size_t n = 0, skipped = 9;
  ASSERT_EQ(plcm_gen_dataset(cfg.cfg, &opts, &n, &skipped), PLCM_OK) << plcm_last_error();
  EXPECT_EQ(n, 200u);
  EXPECT_EQ(skipped, 0u);
  const auto csv = dir / "gen" / "dataset.csv";
  ASSERT_TRUE(fs::exists(csv));
  EXPECT_TRUE(fs::exists(dir / "gen" / "capture.jsonl"));

  // The JSONL capture parses back into the same dataset.
  size_t parsed = 0, orphans = 9;
  const std::string reparsed = (dir / "reparsed.csv").string();
  ASSERT_EQ(plcm_parse_capture((dir / "gen" / "capture.jsonl").c_str(), cfg.cfg, 0, reparsed.c_str(), &parsed,
                               &orphans),
            PLCM_OK)
      << plcm_last_error();
  EXPECT_EQ(parsed, 200u);
  EXPECT_EQ(orphans, 0u);
  EXPECT_EQ(slurp(reparsed), slurp(csv));

  size_t n_ctx = 0;
  const std::string ctx = (dir / "ctx.csv").string();
  ASSERT_EQ(plcm_build_context(csv.c_str(), 2, ctx.c_str(), &n_ctx), PLCM_OK);
  EXPECT_EQ(n_ctx, 198u);

  size_t counts[3] = {};
  const std::string split_dir = (dir / "split").string();
  ASSERT_EQ(plcm_split(csv.c_str(), 5, 0.1, 0.1, split_dir.c_str(), counts), PLCM_OK);
  EXPECT_EQ(counts[0], 160u);
  EXPECT_EQ(counts[1], 20u);
  EXPECT_EQ(counts[2], 20u);
  for (const char* f : {"train.csv", "val.csv", "test.csv"}) EXPECT_TRUE(fs::exists(dir / "split" / f)) << f;
  EXPECT_EQ(plcm_split(csv.c_str(), 5, 0.7, 0.7, split_dir.c_str(), counts), PLCM_E_ARGUMENT);

  const uint32_t eps[] = {0, 10};
  char* report = nullptr;
  char* curve = nullptr;
  ASSERT_EQ(plcm_evaluate(cfg.cfg, csv.c_str(), "oracle", eps, 2, &report, &curve), PLCM_OK) << plcm_last_error();
  const std::string r = take(report);
  EXPECT_NE(r.find("\"bca\": 1.0"), std::string::npos) << r;
  EXPECT_NE(r.find("\"rva\": 1.0"), std::string::npos) << r;
  EXPECT_EQ(take(curve), "eps,rva_eps\n0,1.000000\n10,1.000000\n");
  EXPECT_EQ(plcm_evaluate(cfg.cfg, csv.c_str(), "magic", eps, 2, nullptr, nullptr), PLCM_E_CONFIG);
}

TEST(CApi, PcapFixture) {
  const auto dir = scratch_dir("pcap");
  Config cfg("{}");
  size_t n = 0, orphans = 0;
  const std::string out = (dir / "pairs.csv").string();
  ASSERT_EQ(plcm_parse_capture((kFixtures + "/modbus_session.pcap").c_str(), cfg.cfg, 0, out.c_str(), &n, &orphans),
            PLCM_OK)
      << plcm_last_error();
  EXPECT_EQ(n, 3u);
  EXPECT_NE(slurp(out).find("000300000006010300280001,000300000003018302"), std::string::npos);
  EXPECT_EQ(plcm_parse_capture((kFixtures + "/modbus_session.pcap").c_str(), cfg.cfg, 1502, out.c_str(), &n, &orphans),
            PLCM_E_CAPTURE);
  EXPECT_EQ(plcm_parse_capture("/nonexistent.pcap", cfg.cfg, 0, out.c_str(), &n, &orphans), PLCM_E_IO);
}

// Probing a served plant and probing an oracle honeypot must give the same
// dataset as probing in-process.
TEST(CApi, RemoteTargetsMatchLocal) {
  const auto dir = scratch_dir("remote");
  for (const char* json : {R"({"dataset_size":300})", R"({"protocol":"s7comm","dataset_size":300})"}) {
    Config cfg(json);
    plcm_plant* plant = nullptr;
    ASSERT_EQ(plcm_plant_new(cfg.cfg, &plant), PLCM_OK);
    plcm_server* plant_srv = nullptr;
    ASSERT_EQ(plcm_plant_serve(plant, "127.0.0.1", 0, nullptr, &plant_srv), PLCM_OK) << plcm_last_error();
    plcm_plant_free(plant);  // the server keeps its own reference

    const std::string log_dir = (dir / "pot_logs").string();
    plcm_honeypot_options hopts{};
    hopts.host = "127.0.0.1";
    hopts.ephemeral = 1;
    hopts.deadline_ms = 2000;
    hopts.log_dir = log_dir.c_str();
    plcm_server* pot = nullptr;
    ASSERT_EQ(plcm_honeypot_start(cfg.cfg, "oracle", &hopts, &pot), PLCM_OK) << plcm_last_error();

    std::string csv[3];
    const std::string targets[3] = {"", "127.0.0.1:" + std::to_string(plcm_server_port(plant_srv)),
                                    "127.0.0.1:" + std::to_string(plcm_server_port(pot))};
    for (int i = 0; i < 3; ++i) {
      plcm_gen_options opts{};
      opts.seed = 21;
      opts.target = targets[i].empty() ? nullptr : targets[i].c_str();
      const std::string out = (dir / ("run" + std::to_string(i))).string();
      opts.out_dir = out.c_str();
      size_t n = 0, skipped = 0;
      ASSERT_EQ(plcm_gen_dataset(cfg.cfg, &opts, &n, &skipped), PLCM_OK) << plcm_last_error();
      EXPECT_EQ(n, 300u);
      csv[i] = slurp(dir / ("run" + std::to_string(i)) / "dataset.csv");
    }
    EXPECT_EQ(csv[0], csv[1]) << json;
    EXPECT_EQ(csv[0], csv[2]) << json;

    plcm_server_stop(pot);
    char* summary = nullptr;
    ASSERT_EQ(plcm_summarize_logs(log_dir.c_str(), &summary), PLCM_OK) << plcm_last_error();
    EXPECT_NE(take(summary).find("127.0.0.1"), std::string::npos);
    plcm_server_free(pot);
    plcm_server_stop(plant_srv);
    plcm_server_free(plant_srv);
    fs::remove_all(log_dir);
  }
}

TEST(CApi, BindConflictIsNetworkError) {
  Config cfg("{}");
  plcm_plant* plant = nullptr;
  ASSERT_EQ(plcm_plant_new(cfg.cfg, &plant), PLCM_OK);
  plcm_server* a = nullptr;
  ASSERT_EQ(plcm_plant_serve(plant, "127.0.0.1", 0, nullptr, &a), PLCM_OK);
  plcm_server* b = nullptr;
  EXPECT_EQ(plcm_plant_serve(plant, "127.0.0.1", plcm_server_port(a), nullptr, &b), PLCM_E_NETWORK);
  EXPECT_EQ(b, nullptr);
  plcm_server_free(a);  // free without stop must also shut down cleanly
  plcm_plant_free(plant);
}

}  // namespace
