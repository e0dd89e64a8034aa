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

#include "plcmimic/responder.hpp"

#include "plcmimic/dataset.hpp"
#include "plcmimic/error.hpp"

namespace plcmimic {

OracleResponder::OracleResponder(std::shared_ptr<Plant> plant, bool replay_context)
    : plant_(std::move(plant)), replay_context_(replay_context) {}

std::string OracleResponder::respond(const std::string& source_text, std::chrono::milliseconds) {
  if (source_text.find(':') == std::string::npos) return plant_->handle_hex(source_text);
  const auto view = unframe(source_text);
  if (replay_context_) {
    for (const auto& h : view.history) {
      try {
        plant_->handle_hex(h.source_text);
      } catch (const Error&) {
      }
    }
  }
  return plant_->handle_hex(view.query);
}

std::string ModelResponder::respond(const std::string& source_text, std::chrono::milliseconds budget) {
  std::unique_ptr<wire::ModelClient> client;
  {
    std::lock_guard lock(mu_);
    if (!idle_.empty()) {
      client = std::move(idle_.back());
      idle_.pop_back();
    }
  }
  if (!client) client = std::make_unique<wire::ModelClient>(endpoint_);
  std::string reply = client->query(source_text, budget);
  std::lock_guard lock(mu_);
  idle_.push_back(std::move(client));
  return reply;
}

std::unique_ptr<Responder> make_responder(const std::string& selector, const ProtocolConfig& cfg, bool replay_context) {
  if (selector == "oracle") return std::make_unique<OracleResponder>(std::make_shared<Plant>(cfg), replay_context);
  if (selector.rfind("model:", 0) == 0) return std::make_unique<ModelResponder>(net::parse_endpoint(selector.substr(6)));
  throw Error(Errc::kInvalidConfig, "responder", "expected 'oracle' or 'model:host:port', got '" + selector + "'");
}

}  // namespace plcmimic
