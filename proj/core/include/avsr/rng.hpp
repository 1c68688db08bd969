// Copyright 2026 The vcafe-avsr Authors.
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
#include <random>
#include <string_view>

namespace avsr {

using Rng = std::mt19937_64;

// Derives an independent seed for a named substream ("data", "init", ...)
// of a root seed. Stable across runs and platforms.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
  return Rng(substream_seed(root, name, index));
}

}  // namespace avsr
