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

#include "plcmimic/plcmimic.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include "plcmimic/config.hpp"
#include "plcmimic/datagen.hpp"
#include "plcmimic/dataset.hpp"
#include "plcmimic/error.hpp"
#include "plcmimic/honeypot.hpp"
#include "plcmimic/metrics.hpp"
#include "plcmimic/pcap.hpp"
#include "plcmimic/plant.hpp"
#include "plcmimic/plant_server.hpp"
#include "plcmimic/responder.hpp"

struct plcm_config {
  plcmimic::ProtocolConfig cfg;
};

struct plcm_plant {
  std::shared_ptr<plcmimic::Plant> plant;
};

struct plcm_server {
  std::unique_ptr<plcmimic::PlantServer> plant;
  std::unique_ptr<plcmimic::Honeypot> honeypot;
};

namespace {

thread_local std::string g_last_error;

plcm_status status_of(plcmimic::Errc code) {
  using plcmimic::Errc;
  switch (code) {
    case Errc::kInvalidConfig:
      return PLCM_E_CONFIG;
    case Errc::kIo:
      return PLCM_E_IO;
    case Errc::kBindError:
    case Errc::kConnectionLost:
      return PLCM_E_NETWORK;
    case Errc::kProbeTimeout:
    case Errc::kResponderTimeout:
      return PLCM_E_TIMEOUT;
    case Errc::kEmptyRange:
    case Errc::kDegenerateDensity:
    case Errc::kInsufficientHistory:
      return PLCM_E_DATA;
    case Errc::kBadPcap:
    case Errc::kNoMatchingTraffic:
      return PLCM_E_CAPTURE;
    case Errc::kTrainerUnavailable:
      return PLCM_E_ARGUMENT;
    default:
      return PLCM_E_DECODE;
  }
}

template <typename F>
plcm_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return PLCM_OK;
  } catch (const plcmimic::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PLCM_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PLCM_E_INTERNAL;
  }
}

plcm_status bad_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return PLCM_E_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

const char* plcm_status_name(plcm_status status) {
  switch (status) {
    case PLCM_OK: return "ok";
    case PLCM_E_ARGUMENT: return "argument";
    case PLCM_E_CONFIG: return "config";
    case PLCM_E_DECODE: return "decode";
    case PLCM_E_IO: return "io";
    case PLCM_E_NETWORK: return "network";
    case PLCM_E_TIMEOUT: return "timeout";
    case PLCM_E_DATA: return "data";
    case PLCM_E_CAPTURE: return "capture";
    case PLCM_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* plcm_last_error(void) { return g_last_error.c_str(); }

void plcm_free(void* p) { std::free(p); }

const char* plcm_version(void) { return "0.1.0"; }

plcm_status plcm_config_load(const char* path, plcm_config** out) {
  if (path == nullptr || out == nullptr) return bad_argument("path/out");
  *out = nullptr;
  return guarded([&] { *out = new plcm_config{plcmimic::load_config(path)}; });
}

plcm_status plcm_config_parse(const char* json, plcm_config** out) {
  if (json == nullptr || out == nullptr) return bad_argument("json/out");
  *out = nullptr;
  return guarded([&] { *out = new plcm_config{plcmimic::parse_config(json)}; });
}

plcm_status plcm_config_to_json(const plcm_config* cfg, char** out) {
  if (cfg == nullptr || out == nullptr) return bad_argument("cfg/out");
  return guarded([&] { *out = dup_string(plcmimic::config_to_json(cfg->cfg)); });
}

uint16_t plcm_config_port(const plcm_config* cfg) { return cfg == nullptr ? 0 : cfg->cfg.listen_port(); }

size_t plcm_config_context_len(const plcm_config* cfg) { return cfg == nullptr ? 0 : cfg->cfg.context_len; }

void plcm_config_free(plcm_config* cfg) { delete cfg; }

plcm_status plcm_plant_new(const plcm_config* cfg, plcm_plant** out) {
  if (cfg == nullptr || out == nullptr) return bad_argument("cfg/out");
  *out = nullptr;
  return guarded([&] { *out = new plcm_plant{std::make_shared<plcmimic::Plant>(cfg->cfg)}; });
}

plcm_status plcm_plant_handle(plcm_plant* plant, const char* request_hex, char** response_hex) {
  if (plant == nullptr || request_hex == nullptr || response_hex == nullptr)
    return bad_argument("plant/request_hex/response_hex");
  return guarded([&] {
    *response_hex = dup_string(plant->plant->handle_hex(plcmimic::canonical_hex(request_hex)));
  });
}

void plcm_plant_free(plcm_plant* plant) { delete plant; }

plcm_status plcm_plant_serve(plcm_plant* plant, const char* host, uint16_t port, const char* capture_log,
                             plcm_server** out) {
  if (plant == nullptr || out == nullptr) return bad_argument("plant/out");
  *out = nullptr;
  return guarded([&] {
    auto server = std::make_unique<plcm_server>();
    server->plant = std::make_unique<plcmimic::PlantServer>(plant->plant, host == nullptr ? "0.0.0.0" : host, port,
                                                            capture_log == nullptr ? "" : capture_log);
    server->plant->start();
    *out = server.release();
  });
}

plcm_status plcm_honeypot_start(const plcm_config* cfg, const char* responder, const plcm_honeypot_options* options,
                                plcm_server** out) {
  if (cfg == nullptr || responder == nullptr || out == nullptr) return bad_argument("cfg/responder/out");
  *out = nullptr;
  return guarded([&] {
    plcmimic::HoneypotOptions opts;
    bool ephemeral = false;
    if (options != nullptr) {
      if (options->host != nullptr) opts.host = options->host;
      opts.port = options->port;
      ephemeral = options->ephemeral != 0;
      if (options->deadline_ms != 0) opts.deadline = std::chrono::milliseconds(options->deadline_ms);
      opts.fallback = options->fallback_drop ? plcmimic::FallbackPolicy::kDrop : plcmimic::FallbackPolicy::kException;
      if (options->log_dir != nullptr) opts.log_dir = options->log_dir;
    }
    std::shared_ptr<plcmimic::Responder> r = plcmimic::make_responder(responder, cfg->cfg, false);
    auto server = std::make_unique<plcm_server>();
    server->honeypot = std::make_unique<plcmimic::Honeypot>(cfg->cfg, std::move(r), opts, ephemeral);
    server->honeypot->start();
    *out = server.release();
  });
}

uint16_t plcm_server_port(const plcm_server* server) {
  if (server == nullptr) return 0;
  return server->plant ? server->plant->port() : server->honeypot->port();
}

void plcm_server_stop(plcm_server* server) {
  if (server == nullptr) return;
  if (server->plant) server->plant->stop();
  if (server->honeypot) server->honeypot->stop();
}

void plcm_server_free(plcm_server* server) {
  plcm_server_stop(server);
  delete server;
}

plcm_status plcm_gen_dataset(const plcm_config* cfg, const plcm_gen_options* options, size_t* n_pairs,
                             size_t* n_skipped) {
  if (cfg == nullptr || options == nullptr) return bad_argument("cfg/options");
  return guarded([&] {
    plcmimic::GenOptions opts;
    if (options->target != nullptr) opts.target = options->target;
    opts.seed = options->seed;
    if (options->mode != nullptr) {
      const auto mode = plcmimic::parse_gen_mode(options->mode);
      if (!mode) throw plcmimic::Error(plcmimic::Errc::kInvalidConfig, "mode", options->mode);
      opts.mode = *mode;
    }
    if (options->out_dir != nullptr) opts.out_dir = options->out_dir;
    if (options->pcap_path != nullptr) opts.pcap_path = options->pcap_path;
    if (options->timeout_ms != 0) opts.timeout = std::chrono::milliseconds(options->timeout_ms);
    const auto result = plcmimic::generate_dataset(cfg->cfg, opts);
    if (n_pairs != nullptr) *n_pairs = result.pairs.size();
    if (n_skipped != nullptr) *n_skipped = result.skipped;
  });
}

plcm_status plcm_parse_capture(const char* capture_path, const plcm_config* cfg, uint16_t port, const char* out_csv,
                               size_t* n_pairs, size_t* n_orphans) {
  if (capture_path == nullptr || cfg == nullptr || out_csv == nullptr) return bad_argument("capture/cfg/out_csv");
  return guarded([&] {
    const auto records =
        plcmimic::read_capture(capture_path, cfg->cfg.protocol, port != 0 ? port : cfg->cfg.listen_port());
    const auto result = plcmimic::pair_transactions(cfg->cfg.protocol, records);
    if (result.pairs.empty())
      throw plcmimic::Error(plcmimic::Errc::kNoMatchingTraffic, capture_path, "no request/response pairs");
    plcmimic::write_csv(out_csv, result.pairs);
    if (n_pairs != nullptr) *n_pairs = result.pairs.size();
    if (n_orphans != nullptr) *n_orphans = result.orphans.size();
  });
}

plcm_status plcm_build_context(const char* in_csv, size_t history_len, const char* out_csv, size_t* n_out) {
  if (in_csv == nullptr || out_csv == nullptr) return bad_argument("in_csv/out_csv");
  return guarded([&] {
    const auto windows = plcmimic::build_context(plcmimic::read_csv(in_csv), history_len);
    plcmimic::write_csv(out_csv, windows);
    if (n_out != nullptr) *n_out = windows.size();
  });
}

plcm_status plcm_split(const char* in_csv, uint64_t seed, double val_ratio, double test_ratio, const char* out_dir,
                       size_t counts[3]) {
  if (in_csv == nullptr || out_dir == nullptr) return bad_argument("in_csv/out_dir");
  if (!(val_ratio >= 0 && test_ratio >= 0 && val_ratio + test_ratio <= 1)) {
    g_last_error = "split ratios must be non-negative and sum to at most 1";
    return PLCM_E_ARGUMENT;
  }
  return guarded([&] {
    plcmimic::Rng rng(seed);
    const auto split =
        plcmimic::split_dataset(plcmimic::read_csv(in_csv), {1.0 - val_ratio - test_ratio, val_ratio, test_ratio}, rng);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    plcmimic::write_csv((dir / "train.csv").string(), split.train);
    plcmimic::write_csv((dir / "val.csv").string(), split.val);
    plcmimic::write_csv((dir / "test.csv").string(), split.test);
    if (counts != nullptr) {
      counts[0] = split.train.size();
      counts[1] = split.val.size();
      counts[2] = split.test.size();
    }
  });
}

plcm_status plcm_bca(const char* predicted_hex, const char* reference_hex, int* out) {
  if (predicted_hex == nullptr || reference_hex == nullptr || out == nullptr) return bad_argument("hex/out");
  return guarded([&] { *out = plcmimic::bca(predicted_hex, reference_hex) ? 1 : 0; });
}

plcm_status plcm_rva(const plcm_config* cfg, const char* request_hex, const char* predicted_hex, int* out,
                     char** reason) {
  if (cfg == nullptr || request_hex == nullptr || predicted_hex == nullptr || out == nullptr)
    return bad_argument("cfg/hex/out");
  return guarded([&] {
    const auto r = plcmimic::rva(cfg->cfg, request_hex, predicted_hex);
    if (reason != nullptr) *reason = dup_string(r.reason);
    *out = r.valid ? 1 : 0;
  });
}

plcm_status plcm_rva_eps(const plcm_config* cfg, const char* request_hex, const char* predicted_hex,
                         const char* reference_hex, uint32_t eps, int* out) {
  if (cfg == nullptr || request_hex == nullptr || predicted_hex == nullptr || reference_hex == nullptr ||
      out == nullptr)
    return bad_argument("cfg/hex/out");
  return guarded([&] { *out = plcmimic::rva_eps(cfg->cfg, request_hex, predicted_hex, reference_hex, eps) ? 1 : 0; });
}

plcm_status plcm_evaluate(const plcm_config* cfg, const char* dataset_csv, const char* responder, const uint32_t* eps,
                          size_t n_eps, char** report_json, char** curve_csv) {
  if (cfg == nullptr || dataset_csv == nullptr || responder == nullptr || (eps == nullptr && n_eps != 0))
    return bad_argument("cfg/dataset/responder/eps");
  return guarded([&] {
    const auto records = plcmimic::read_csv(dataset_csv);
    auto r = plcmimic::make_responder(responder, cfg->cfg, true);
    const auto report = plcmimic::evaluate(cfg->cfg, records, *r, std::vector<uint32_t>(eps, eps + n_eps));
    std::unique_ptr<char, decltype(&std::free)> json(dup_string(report.to_json()), &std::free);
    std::unique_ptr<char, decltype(&std::free)> curve(dup_string(report.curve_csv()), &std::free);
    if (report_json != nullptr) *report_json = json.release();
    if (curve_csv != nullptr) *curve_csv = curve.release();
  });
}

plcm_status plcm_summarize_logs(const char* path, char** summary_json) {
  if (path == nullptr || summary_json == nullptr) return bad_argument("path/summary_json");
  return guarded([&] { *summary_json = dup_string(plcmimic::summarize_logs(path).dump(2)); });
}

}  // extern "C"
