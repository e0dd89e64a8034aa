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

/* C interface to the plcmimic library.
 *
 * Every function returns a plcm_status. On failure, plcm_last_error()
 * describes the error for the calling thread. Strings returned through
 * `char**` out-parameters are heap allocated and released with plcm_free().
 * Handles are opaque and released with their matching *_free function.
 */

#ifndef PLCMIMIC_PLCMIMIC_H_
#define PLCMIMIC_PLCMIMIC_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PLCM_API __declspec(dllexport)
#else
#define PLCM_API __attribute__((visibility("default")))
#endif

typedef enum plcm_status {
  PLCM_OK = 0,
  PLCM_E_ARGUMENT = 1, /* null or out-of-domain argument */
  PLCM_E_CONFIG = 2,   /* invalid configuration */
  PLCM_E_DECODE = 3,   /* frame or hex could not be decoded */
  PLCM_E_IO = 4,       /* file system */
  PLCM_E_NETWORK = 5,  /* bind, connect, connection lost */
  PLCM_E_TIMEOUT = 6,  /* probe or responder timeout */
  PLCM_E_DATA = 7,     /* empty range, degenerate density, short history */
  PLCM_E_CAPTURE = 8,  /* unreadable capture or no matching traffic */
  PLCM_E_INTERNAL = 9
} plcm_status;

PLCM_API const char* plcm_status_name(plcm_status status);
/* Message of the last failure on this thread; "" when none. */
PLCM_API const char* plcm_last_error(void);
PLCM_API void plcm_free(void* p);
PLCM_API const char* plcm_version(void);

/* ---- configuration ---------------------------------------------------- */

typedef struct plcm_config plcm_config;

PLCM_API plcm_status plcm_config_load(const char* path, plcm_config** out);
PLCM_API plcm_status plcm_config_parse(const char* json, plcm_config** out);
PLCM_API plcm_status plcm_config_to_json(const plcm_config* cfg, char** out);
PLCM_API uint16_t plcm_config_port(const plcm_config* cfg);
PLCM_API size_t plcm_config_context_len(const plcm_config* cfg);
PLCM_API void plcm_config_free(plcm_config* cfg);

/* ---- simulated PLC ---------------------------------------------------- */

typedef struct plcm_plant plcm_plant;
typedef struct plcm_server plcm_server;

PLCM_API plcm_status plcm_plant_new(const plcm_config* cfg, plcm_plant** out);
PLCM_API plcm_status plcm_plant_handle(plcm_plant* plant, const char* request_hex, char** response_hex);
PLCM_API void plcm_plant_free(plcm_plant* plant);

/* Serves the plant until plcm_server_stop. Port 0 binds an ephemeral port;
 * capture_log may be NULL. The server keeps the plant alive. */
PLCM_API plcm_status plcm_plant_serve(plcm_plant* plant, const char* host, uint16_t port, const char* capture_log,
                                      plcm_server** out);

typedef struct plcm_honeypot_options {
  const char* host;      /* NULL: 0.0.0.0 */
  uint16_t port;         /* 0: protocol default */
  int ephemeral;         /* nonzero: OS-chosen port, ignores `port` */
  uint32_t deadline_ms;  /* 0: 500 */
  int fallback_drop;     /* nonzero: drop instead of device-failure exception */
  const char* log_dir;   /* NULL: no interaction log */
} plcm_honeypot_options;

/* responder: "oracle" or "model:host:port". */
PLCM_API plcm_status plcm_honeypot_start(const plcm_config* cfg, const char* responder,
                                         const plcm_honeypot_options* options, plcm_server** out);

PLCM_API uint16_t plcm_server_port(const plcm_server* server);
PLCM_API void plcm_server_stop(plcm_server* server);
PLCM_API void plcm_server_free(plcm_server* server);

/* ---- datasets --------------------------------------------------------- */

typedef struct plcm_gen_options {
  const char* target;    /* "host:port"; NULL probes an in-process plant */
  uint64_t seed;
  const char* mode;      /* "boundaries" (NULL), "math", "process" */
  const char* out_dir;   /* receives dataset.csv and capture.jsonl */
  const char* pcap_path; /* optional */
  uint32_t timeout_ms;   /* 0: 2000 */
} plcm_gen_options;

PLCM_API plcm_status plcm_gen_dataset(const plcm_config* cfg, const plcm_gen_options* options, size_t* n_pairs,
                                      size_t* n_skipped);

/* Pairs requests and responses of a pcap or JSONL capture into a CSV.
 * port 0 uses the configured port. */
PLCM_API plcm_status plcm_parse_capture(const char* capture_path, const plcm_config* cfg, uint16_t port,
                                        const char* out_csv, size_t* n_pairs, size_t* n_orphans);

PLCM_API plcm_status plcm_build_context(const char* in_csv, size_t history_len, const char* out_csv, size_t* n_out);

/* Writes train.csv, val.csv and test.csv into out_dir. counts receives the
 * three sizes in that order. */
PLCM_API plcm_status plcm_split(const char* in_csv, uint64_t seed, double val_ratio, double test_ratio,
                                const char* out_dir, size_t counts[3]);

/* ---- metrics ---------------------------------------------------------- */

PLCM_API plcm_status plcm_bca(const char* predicted_hex, const char* reference_hex, int* out);
/* reason (may be NULL) receives the first failed check, "" when valid. */
PLCM_API plcm_status plcm_rva(const plcm_config* cfg, const char* request_hex, const char* predicted_hex, int* out,
                              char** reason);
PLCM_API plcm_status plcm_rva_eps(const plcm_config* cfg, const char* request_hex, const char* predicted_hex,
                                  const char* reference_hex, uint32_t eps, int* out);

/* Queries the responder for every record of dataset_csv. report_json and
 * curve_csv may be NULL. */
PLCM_API plcm_status plcm_evaluate(const plcm_config* cfg, const char* dataset_csv, const char* responder,
                                   const uint32_t* eps, size_t n_eps, char** report_json, char** curve_csv);

PLCM_API plcm_status plcm_summarize_logs(const char* path, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* PLCMIMIC_PLCMIMIC_H_ */
