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
#include <vector>

#include "avsr/sample.hpp"
#include "avsr/vocab.hpp"

namespace avsr {

// One JSON object per line:
//   {"id": "train-0", "transcript": "c a f", "snr_db": null | number,
//    "noise_kind": "clean", "visual": [[...], ...], "audio": [[...], ...]}
// visual is T x V_dim, audio is S x F, transcript is space-separated symbols.
std::string sample_to_json(const AVSample& sample, const Vocab& vocab);
AVSample sample_from_json(const std::string& line, const Vocab& vocab);

void write_samples(const std::filesystem::path& path, const std::vector<AVSample>& samples,
                   const Vocab& vocab);
std::vector<AVSample> read_samples(const std::filesystem::path& path, const Vocab& vocab);

}  // namespace avsr
