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
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "avsr/checkpoint.hpp"
#include "avsr/config.hpp"
#include "avsr/gradcheck.hpp"
#include "avsr/lm.hpp"
#include "avsr/model.hpp"
#include "avsr/results.hpp"
#include "avsr/synth.hpp"

namespace avsr {

struct Dataset {
  PhonemeAlphabet alphabet;
  Vocab vocab;
  std::vector<AVSample> train;
  std::vector<AVSample> val;
  std::vector<AVSample> test;
};

PhonemeAlphabet make_alphabet(const ExperimentConfig& config);

// Splits from config.data.dir when set, otherwise generated from the root
// seed.
Dataset make_dataset(const ExperimentConfig& config);

// Writes train/val/test .jsonl files plus manifest.json into `dir`.
void write_dataset(const std::filesystem::path& dir, const Dataset& data,
                   const ExperimentConfig& config);

// Noise applied to training sample `index` in `epoch`; identical for every
// model mode.
AVSample augment_training_sample(const AVSample& sample, std::size_t index, std::size_t epoch,
                                 const std::vector<AVSample>& pool, const Dataset& data,
                                 const ExperimentConfig& config);

// Test split corrupted with `kind` at `snr_db`. Noise realizations depend
// only on the root seed, the cell and the sample index.
std::vector<AVSample> corrupt_split(const std::vector<AVSample>& samples, NoiseKind kind,
                                    double snr_db, const std::string& stream,
                                    const Dataset& data, const ExperimentConfig& config);

struct EpochLog {
  std::size_t epoch = 0;  // 0 = before training
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainedModel {
  ExperimentConfig config;
  std::unique_ptr<AvsrModel> model;
  BigramLM lm;
  std::vector<EpochLog> log;
  std::size_t steps = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// AdamW over mini-batches of per-token joint losses. Throws DivergenceError
// naming the step when the loss or gradient stops being finite.
TrainedModel train(const ExperimentConfig& config, const Dataset& data,
                   const EpochCallback& on_epoch = {});

// Mean per-token joint loss over `samples`.
double mean_loss(const AvsrModel& model, const std::vector<AVSample>& samples, const Vocab& vocab,
                 double loss_weight);

// Validation split under the training corruption, fixed across epochs.
std::vector<AVSample> validation_set(const Dataset& data, const ExperimentConfig& config);

BigramLM fit_lm(const std::vector<AVSample>& train, const Vocab& vocab);

TrainedModel load_trained(const std::filesystem::path& checkpoint);
void save_trained(const std::filesystem::path& checkpoint, const TrainedModel& trained);
std::string training_log_csv(const std::vector<EpochLog>& log);

struct DecodedSample {
  std::string id;
  std::vector<std::size_t> hypothesis;  // content tokens
  std::vector<std::size_t> reference;   // content tokens
  double wer = 0.0;
  double cer = 0.0;
};

std::vector<DecodedSample> decode_samples(const AvsrModel& model, const BigramLM& lm,
                                          const std::vector<AVSample>& samples,
                                          const Vocab& vocab, const DecodeConfig& decode,
                                          std::size_t threads);

// Test split decoded at every (noise kind, SNR) cell of config.eval.
ResultTable evaluate_sweep(const AvsrModel& model, const BigramLM& lm, const Dataset& data,
                           const ExperimentConfig& config);

// One JSON object per line: {"sample_id", "hypothesis", "reference", "wer"}.
std::string decode_jsonl(const std::vector<DecodedSample>& decoded, const Vocab& vocab);

// Mask dump for avsr_vcafe: "frame,channel,value" rows.
std::string mask_csv(const Tensor& mask);

struct GradCheckConfig {
  Mode mode = Mode::kAvsrVcafe;
  double tolerance = 1e-4;
  double loss_weight = 0.8;
  // Scales the loss by zero; every gradient is then exactly zero.
  bool zero_loss = false;
  std::uint64_t seed = 3;
  AvsrModel::FeatureHook hook;
};

struct GradCheckSummary {
  std::vector<GroupReport> groups;
  bool passed = true;
  std::vector<std::string> failing;
};

// Tiny model (dims <= 8, T <= 6) so every parameter entry can be perturbed.
ExperimentConfig tiny_config(Mode mode);
GradCheckSummary run_gradcheck(const GradCheckConfig& config);

}  // namespace avsr
