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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace plcmimic {

using Bytes = std::vector<std::uint8_t>;

/// Lowercase hex, no separators. This is the canonical interchange form for
/// every frame that crosses a module boundary.
std::string to_hex(std::span<const std::uint8_t> bytes);

/// Accepts either case. Throws Error(kBadHex) on odd length or a non-hex digit.
Bytes from_hex(std::string_view hex);

/// from_hex followed by to_hex.
std::string canonical_hex(std::string_view hex);

bool is_hex(std::string_view text) noexcept;

}  // namespace plcmimic
