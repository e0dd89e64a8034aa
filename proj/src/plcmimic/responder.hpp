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

// Sources of responses: the exact oracle (a plant) or an external model.

#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "plcmimic/plant.hpp"
#include "plcmimic/wire.hpp"

namespace plcmimic {

class Responder {
 public:
  virtual ~Responder() = default;
  /// Response hex for `source_text` (bare request hex or a context window).
  /// May throw; callers treat any failure as "no answer".
  virtual std::string respond(const std::string& source_text, std::chrono::milliseconds budget) = 0;
  virtual std::string name() const = 0;
};

/// Answers from a persistent plant. With `replay_context`, the history
/// requests of a context window are applied before the query so stateful
/// answers match the captured session.
class OracleResponder : public Responder {
 public:
  OracleResponder(std::shared_ptr<Plant> plant, bool replay_context);
  std::string respond(const std::string& source_text, std::chrono::milliseconds budget) override;
  std::string name() const override { return "oracle"; }
  Plant& plant() { return *plant_; }

 private:
  std::shared_ptr<Plant> plant_;
  bool replay_context_;
};

/// Forwards source_text over the line protocol. Holds a small pool of
/// connections so concurrent callers do not share one.
class ModelResponder : public Responder {
 public:
  explicit ModelResponder(net::Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string respond(const std::string& source_text, std::chrono::milliseconds budget) override;
  std::string name() const override { return "model"; }

 private:
  net::Endpoint endpoint_;
  std::mutex mu_;
  std::vector<std::unique_ptr<wire::ModelClient>> idle_;
};

/// "oracle" (needs `cfg`) or "model:host:port".
std::unique_ptr<Responder> make_responder(const std::string& selector, const ProtocolConfig& cfg, bool replay_context);

}  // namespace plcmimic
