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

#include <filesystem>
#include <string>

#include "avsr/config.hpp"
#include "avsr/lm.hpp"
#include "avsr/params.hpp"

namespace avsr {

// Text checkpoint: a header line, the experiment config as one JSON line,
// then one line per named tensor ("name rank dims... values...") with
// values in hexadecimal floating point, so round trips are exact.
struct Checkpoint {
  ExperimentConfig config;
  ParamStore params;
  Tensor lm_counts;  // BigramLM::counts(); empty when no LM was fit
};

std::string serialize_checkpoint(const ExperimentConfig& config, const ParamStore& params,
                                 const BigramLM& lm);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const ExperimentConfig& config,
                     const ParamStore& params, const BigramLM& lm);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies every tensor of `from` into the same-named parameter of `into`;
// names and shapes must match exactly.
void assign_parameters(ParamStore& into, const ParamStore& from);

}  // namespace avsr
