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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "avsr/beam_search.hpp"
#include "avsr/model.hpp"
#include "avsr/optim.hpp"
#include "avsr/synth.hpp"

namespace avsr {

struct DataConfig {
  AlphabetConfig alphabet;  // alphabet.seed is derived from the root seed
  LengthRange lengths;
  std::size_t train_samples = 2000;
  std::size_t val_samples = 200;
  std::size_t test_samples = 200;
  // Directory with train/val/test .jsonl files; empty generates the splits
  // in memory from the root seed.
  std::string dir;
};

struct TrainConfig {
  double loss_weight = 0.8;  // w in w * L_att + (1 - w) * L_ctc
  AdamWConfig optimizer;
  std::size_t batch_size = 16;
  std::size_t epochs = 20;
  // Global gradient-norm clip; 0 disables.
  double grad_clip = 5.0;
  // Corruption drawn per sample and epoch; clean disables augmentation.
  NoiseKind noise = NoiseKind::kBabble;
  std::vector<double> snr_db{-5.0, 0.0, 5.0, 10.0, 15.0};
  // Probability of leaving a training sample uncorrupted.
  double clean_fraction = 0.2;
  // Longest run of audio frames zeroed per sample; 0 disables time masking.
  std::size_t time_mask = 0;
};

struct EvalConfig {
  std::vector<NoiseKind> noise{NoiseKind::kBabble};
  std::vector<double> snr_db{-5.0, 0.0, 5.0, 10.0, 15.0};
  // Worker threads for decoding; 0 uses the hardware concurrency.
  std::size_t threads = 0;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  ModelConfig model;
  DataConfig data;
  TrainConfig train;
  DecodeConfig decode;
  EvalConfig eval;
};

// Fills derived fields (model dims shared by encoder and decoder, alphabet
// seed) and checks ranges. Throws ConfigError.
void finalize(ExperimentConfig& config);

std::string config_to_json(const ExperimentConfig& config, int indent = 2);
// Keys missing from `text` keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(std::string_view text);
ExperimentConfig load_config(const std::string& path);

// Applies "dotted.key=value" (value parsed as JSON, or taken as a string).
void apply_override(ExperimentConfig& config, std::string_view assignment);

}  // namespace avsr
