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

// Dataset generation by probing a plant: boundary probing, math-block
// sampling, process probing and iterative dataset sizing.

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plcmimic/config.hpp"
#include "plcmimic/dataset.hpp"
#include "plcmimic/hex.hpp"
#include "plcmimic/net.hpp"
#include "plcmimic/pcap.hpp"
#include "plcmimic/plant.hpp"
#include "plcmimic/protocol.hpp"
#include "plcmimic/rng.hpp"

namespace plcmimic {

/// One request and its response as seen by the prober.
struct Exchange {
  std::chrono::system_clock::time_point sent, received;
  Bytes request, response;
};

class ProbeClient {
 public:
  virtual ~ProbeClient() = default;
  /// Response to `request`, or nullopt when the request was given up on.
  virtual std::optional<Bytes> exchange(std::span<const std::uint8_t> request) = 0;
  /// Every exchange so far, connection setup included.
  const std::vector<Exchange>& transcript() const noexcept { return transcript_; }
  std::size_t skipped() const noexcept { return skipped_; }
  /// Removes exchanges [from, to) from the transcript (pilot probing).
  void forget(std::size_t from, std::size_t to) {
    transcript_.erase(transcript_.begin() + static_cast<std::ptrdiff_t>(from),
                      transcript_.begin() + static_cast<std::ptrdiff_t>(to));
  }
  /// Client/server addresses used when writing a pcap.
  virtual std::pair<net::Endpoint, net::Endpoint> endpoints() const = 0;

 protected:
  std::vector<Exchange> transcript_;
  std::size_t skipped_ = 0;
};

/// In-process probe of a Plant; S7 connection setup is replayed so the
/// transcript looks like a network session.
class LocalProbe : public ProbeClient {
 public:
  explicit LocalProbe(Plant& plant);
  std::optional<Bytes> exchange(std::span<const std::uint8_t> request) override;
  std::pair<net::Endpoint, net::Endpoint> endpoints() const override;

 private:
  Plant& plant_;
};

/// TCP probe. A timed-out or failed request reconnects and is retried up to
/// `retries` times, then skipped (reported on stderr).
class TcpProbe : public ProbeClient {
 public:
  TcpProbe(net::Endpoint target, Protocol protocol, std::chrono::milliseconds timeout = std::chrono::seconds(2),
           int retries = 3);
  std::optional<Bytes> exchange(std::span<const std::uint8_t> request) override;
  std::pair<net::Endpoint, net::Endpoint> endpoints() const override;

 private:
  void connect();
  Bytes roundtrip(std::span<const std::uint8_t> request);

  net::Endpoint target_;
  Protocol protocol_;
  std::chrono::milliseconds timeout_;
  int retries_;
  net::Socket sock_;
  std::unique_ptr<net::FrameReader> reader_;
  net::Endpoint local_;
};

/// Builds request frames with increasing transaction ids and records pairs.
class ProbeSession {
 public:
  ProbeSession(ProbeClient& client, const ProtocolConfig& cfg) : client_(client), cfg_(cfg) {}

  /// Sends `op`; appends the pair unless the request was skipped.
  std::optional<Bytes> run(const Operation& op, std::vector<SamplePair>& out);
  const ProtocolConfig& config() const noexcept { return cfg_; }

 private:
  ProbeClient& client_;
  const ProtocolConfig& cfg_;
  std::uint16_t next_id_ = 1;
};

/// Boundary probing. Passes alternate between digital and analog points
/// and repeat until exactly cfg.dataset_size pairs exist.
std::vector<SamplePair> execute_boundaries(ProbeSession& session, const ProtocolConfig& cfg, Rng& rng);

/// Pairs produced by one pass over `kind`; probing stops early once `limit`
/// pairs exist.
std::vector<SamplePair> boundaries_pass(ProbeSession& session, const ProtocolConfig& cfg, DataKind kind, Rng& rng,
                                        std::size_t limit = SIZE_MAX);

/// Register counts written for input value x; saturates to the u16 range
/// so values outside the configured range reach the plant and draw an
/// exception.
std::uint16_t encode_input(const MathBlockConfig& block, double x);

/// Write x to the block input, then read the output: two pairs per x.
std::vector<SamplePair> probe_math(ProbeSession& session, const MathBlockConfig& block, const std::vector<double>& xs);

/// Probe function for the sampler: the block response measured at
/// `points` evenly spaced inputs, linearly interpolated.
std::function<double(double)> pilot_probe(ProbeSession& session, const MathBlockConfig& block, double x_low,
                                          double x_high, std::size_t points);

/// Evenly spaced register values over [low, high].
std::vector<std::uint16_t> even_values(double low, double high, std::size_t points);

/// valid_function then exception_function, in session order.
std::vector<SamplePair> probe_process(ProbeSession& session, const ProtocolConfig& cfg, Rng& rng);
std::vector<SamplePair> valid_function(ProbeSession& session, const ProtocolConfig& cfg);
std::vector<SamplePair> exception_function(ProbeSession& session, const ProtocolConfig& cfg, Rng& rng);

/// Capture of a probe transcript: plant-perspective JSONL records and pcap
/// segments.
std::string transcript_jsonl(const ProbeClient& client);
std::vector<WireSegment> transcript_segments(const ProbeClient& client);

enum class GenMode { kBoundaries, kMath, kProcess };
std::optional<GenMode> parse_gen_mode(std::string_view name);

struct GenOptions {
  std::string target;  // "host:port"; empty probes an in-process plant
  std::uint64_t seed = 0;
  GenMode mode = GenMode::kBoundaries;
  std::string out_dir;    // dataset.csv and capture.jsonl; empty writes nothing
  std::string pcap_path;  // optional
  std::chrono::milliseconds timeout{2000};
};

struct GenResult {
  std::vector<SamplePair> pairs;
  std::size_t skipped = 0;
};

GenResult generate_dataset(const ProtocolConfig& cfg, const GenOptions& options);

struct SizingConfig {
  std::size_t start = 200;
  std::size_t max_size = 25600;
  std::size_t patience = 2;  // consecutive non-improving evaluations
};

struct SizingReport {
  std::size_t best_size = 0;
  double best_score = 0.0;
  std::vector<std::pair<std::size_t, double>> history;
};

/// Trains on `size` samples and returns the RVA-eps of the result. Throws
/// Error(kTrainerUnavailable) when no trainer can be reached.
using Trainer = std::function<double(std::size_t size)>;

/// Doubles the size from cfg.start while RVA-eps improves; a tie counts as
/// no improvement.
SizingReport iterative_sizing(const Trainer& trainer, const SizingConfig& cfg);

}  // namespace plcmimic
