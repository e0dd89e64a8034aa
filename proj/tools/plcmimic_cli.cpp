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

// plcmimic command-line front end. Uses only the C interface.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plcmimic/plcmimic.h"

namespace {

struct CliError {
  plcm_status status;
};

void check(plcm_status s) {
  if (s != PLCM_OK) throw CliError{s};
}

struct ConfigHandle {
  plcm_config* p = nullptr;
  explicit ConfigHandle(const std::string& path) { check(plcm_config_load(path.c_str(), &p)); }
  ~ConfigHandle() { plcm_config_free(p); }
};

struct CString {
  char* p = nullptr;
  ~CString() { plcm_free(p); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  f << text;
  if (!f) {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    throw CliError{PLCM_E_IO};
  }
}

// Blocks until SIGINT or SIGTERM.
void wait_for_signal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
}

std::vector<uint32_t> parse_eps(const std::string& text) {
  std::vector<uint32_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(static_cast<uint32_t>(std::stoul(item)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  // Servers wait with sigwait, so the signals must be blocked in every thread.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  CLI::App app{"PLC behavior cloning toolkit: plant simulator, dataset generation, evaluation, honeypot"};
  app.require_subcommand(1);
  app.set_version_flag("--version", plcm_version());

  std::string config, host = "0.0.0.0", log, target, out, mode = "boundaries", pcap, capture, dataset, responder = "oracle",
                      eps_text = "0,1,2,5,10,100", report, curve, fallback = "exception";
  uint16_t port = 0;
  uint64_t seed = 0;
  uint32_t timeout_ms = 2000, deadline_ms = 500;
  int history = -1;
  double val_ratio = 0.1, test_ratio = 0.1;

  auto* serve = app.add_subcommand("serve-plant", "Run the simulated PLC");
  serve->add_option("--config", config, "Plant configuration (JSON)")->required();
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port (default: protocol port)");
  serve->add_option("--log", log, "Capture log (JSONL)");

  auto* gen = app.add_subcommand("gen-dataset", "Probe a plant and write dataset.csv + capture.jsonl");
  gen->add_option("--config", config, "Protocol configuration (JSON)")->required();
  gen->add_option("--target", target, "host:port of the device, or 'local' for an in-process plant")->required();
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--mode", mode, "boundaries | math | process")->check(CLI::IsMember({"boundaries", "math", "process"}));
  gen->add_option("--pcap", pcap, "Also write the exchanges as a pcap file");
  gen->add_option("--timeout-ms", timeout_ms, "Per-request timeout");

  auto* parse = app.add_subcommand("parse-capture", "Pair requests and responses of a capture into CSV");
  parse->add_option("--capture", capture, "pcap or JSONL capture")->required();
  parse->add_option("--config", config, "Protocol configuration (JSON)")->required();
  parse->add_option("--port", port, "Server port (default: configured port)");
  parse->add_option("--out", out, "Output CSV")->required();

  auto* context = app.add_subcommand("context", "Frame a CSV into context windows");
  context->add_option("--dataset", dataset, "Input CSV")->required();
  auto* len_opt = context->add_option("--len", history, "History length L");
  context->add_option("--config", config, "Take L from context_len");
  context->add_option("--out", out, "Output CSV")->required();

  auto* split = app.add_subcommand("split", "Shuffle and split a CSV into train/val/test");
  split->add_option("--dataset", dataset, "Input CSV")->required();
  split->add_option("--seed", seed, "Random seed");
  split->add_option("--val", val_ratio, "Validation fraction");
  split->add_option("--test", test_ratio, "Test fraction");
  split->add_option("--out", out, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Score a responder with BCA, RVA and RVA-eps");
  eval->add_option("--dataset", dataset, "Labeled CSV")->required();
  eval->add_option("--config", config, "Validator configuration (JSON)")->required();
  eval->add_option("--responder", responder, "oracle | model:host:port");
  eval->add_option("--eps", eps_text, "Comma-separated tolerances");
  eval->add_option("--report", report, "Write the report JSON here");
  eval->add_option("--curve", curve, "Write the eps curve CSV here");

  auto* honeypot = app.add_subcommand("honeypot", "Serve a honeypot backed by a responder");
  honeypot->add_option("--config", config, "Protocol configuration (JSON)")->required();
  honeypot->add_option("--responder", responder, "oracle | model:host:port");
  honeypot->add_option("--deadline-ms", deadline_ms, "Response deadline");
  honeypot->add_option("--log", log, "Interaction log directory");
  honeypot->add_option("--host", host, "Listen address");
  honeypot->add_option("--port", port, "Listen port (default: protocol port)");
  honeypot->add_option("--fallback", fallback, "drop | exception")->check(CLI::IsMember({"drop", "exception"}));

  auto* summarize = app.add_subcommand("summarize-logs", "Per-IP activity and latency of an interaction log");
  summarize->add_option("--log", log, "interactions.jsonl or its directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      ConfigHandle cfg(config);
      plcm_plant* plant = nullptr;
      check(plcm_plant_new(cfg.p, &plant));
      plcm_server* server = nullptr;
      const plcm_status s = plcm_plant_serve(plant, host.c_str(), port != 0 ? port : plcm_config_port(cfg.p),
                                             log.empty() ? nullptr : log.c_str(), &server);
      plcm_plant_free(plant);
      check(s);
      std::printf("plant listening on %s:%u\n", host.c_str(), plcm_server_port(server));
      std::fflush(stdout);
      wait_for_signal();
      plcm_server_free(server);
    } else if (*gen) {
      ConfigHandle cfg(config);
      plcm_gen_options opts{};
      opts.target = target == "local" ? nullptr : target.c_str();
      opts.seed = seed;
      opts.mode = mode.c_str();
      opts.out_dir = out.c_str();
      opts.pcap_path = pcap.empty() ? nullptr : pcap.c_str();
      opts.timeout_ms = timeout_ms;
      size_t n = 0, skipped = 0;
      check(plcm_gen_dataset(cfg.p, &opts, &n, &skipped));
      std::printf("%zu pairs written to %s (%zu requests skipped)\n", n, out.c_str(), skipped);
    } else if (*parse) {
      ConfigHandle cfg(config);
      size_t n = 0, orphans = 0;
      check(plcm_parse_capture(capture.c_str(), cfg.p, port, out.c_str(), &n, &orphans));
      std::printf("%zu pairs, %zu orphan frames\n", n, orphans);
    } else if (*context) {
      if (len_opt->count() == 0) {
        if (config.empty()) {
          std::fprintf(stderr, "error: give --len or --config\n");
          return 2;
        }
        ConfigHandle cfg(config);
        history = static_cast<int>(plcm_config_context_len(cfg.p));
      }
      size_t n = 0;
      check(plcm_build_context(dataset.c_str(), static_cast<size_t>(history), out.c_str(), &n));
      std::printf("%zu windows (L=%d)\n", n, history);
    } else if (*split) {
      size_t counts[3] = {0, 0, 0};
      check(plcm_split(dataset.c_str(), seed, val_ratio, test_ratio, out.c_str(), counts));
      std::printf("train %zu, val %zu, test %zu\n", counts[0], counts[1], counts[2]);
    } else if (*eval) {
      ConfigHandle cfg(config);
      const auto eps = parse_eps(eps_text);
      CString json, curve_text;
      check(plcm_evaluate(cfg.p, dataset.c_str(), responder.c_str(), eps.data(), eps.size(), &json.p, &curve_text.p));
      std::printf("%s\n", json.p);
      if (!report.empty()) write_file(report, json.p);
      if (!curve.empty()) write_file(curve, curve_text.p);
    } else if (*honeypot) {
      ConfigHandle cfg(config);
      plcm_honeypot_options opts{};
      opts.host = host.c_str();
      opts.port = port;
      opts.deadline_ms = deadline_ms;
      opts.fallback_drop = fallback == "drop";
      opts.log_dir = log.empty() ? nullptr : log.c_str();
      plcm_server* server = nullptr;
      check(plcm_honeypot_start(cfg.p, responder.c_str(), &opts, &server));
      std::printf("honeypot (%s) listening on %s:%u\n", responder.c_str(), host.c_str(), plcm_server_port(server));
      std::fflush(stdout);
      wait_for_signal();
      plcm_server_free(server);
    } else if (*summarize) {
      CString json;
      check(plcm_summarize_logs(log.c_str(), &json.p));
      std::printf("%s\n", json.p);
    }
  } catch (const CliError& e) {
    const char* msg = plcm_last_error();
    std::fprintf(stderr, "error (%s): %s\n", plcm_status_name(e.status), msg);
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
