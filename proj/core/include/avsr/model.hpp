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
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "avsr/beam_search.hpp"
#include "avsr/frontend.hpp"
#include "avsr/graph.hpp"
#include "avsr/lm.hpp"
#include "avsr/sample.hpp"
#include "avsr/seqmodel.hpp"
#include "avsr/vcafe.hpp"
#include "avsr/vocab.hpp"

namespace avsr {

enum class Mode { kAsr, kVsr, kAvsrBaseline, kAvsrVcafe };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);
bool uses_audio(Mode mode);
bool uses_video(Mode mode);

struct ModelConfig {
  Mode mode = Mode::kAvsrVcafe;
  FrontendConfig frontend;
  VCafeConfig vcafe;
  EncoderConfig encoder;
  DecoderConfig decoder;
};

// Throws ConfigError when dimensions do not line up.
void validate(const ModelConfig& config);

// Tokens of a phoneme transcript: phoneme p maps to content token p.
std::vector<std::size_t> transcript_tokens(const AVSample& sample, const Vocab& vocab);

// Front-ends, fusion (mode dependent), encoder, decoder and CTC head, with
// every learnable tensor in one named ParamStore.
class AvsrModel {
 public:
  AvsrModel(const ModelConfig& config, std::size_t vocab_size, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  Mode mode() const noexcept { return config_.mode; }
  std::size_t vocab_size() const noexcept { return seq_.vocab_size; }
  ParamStore& params() noexcept { return store_; }
  const ParamStore& params() const noexcept { return store_; }

  struct Forward {
    Var f_a;  // unset in vsr mode
    Var f_v;  // unset in asr mode
    std::optional<VCafeOutput> vcafe;
    Var encoder_input;
    Var encoded;
  };

  // `store` defaults to params(); gradient checks pass a perturbed copy.
  Forward forward(Graph& g, const AVSample& sample, const ParamStore* store = nullptr) const;

  // Hook applied to the encoder output before the heads; used by tests.
  using FeatureHook = std::function<Var(Graph&, Var)>;

  JointLoss loss(Graph& g, const AVSample& sample, std::span<const std::size_t> labels, double w,
                 const ParamStore* store = nullptr, const FeatureHook& hook = {}) const;

  // Per-frame CTC log-probabilities [T, V] and the encoder memory.
  struct DecodeInputs {
    Tensor ctc_log_probs;
    Tensor memory;
  };
  DecodeInputs decode_inputs(const AVSample& sample) const;

  NextTokenScorer attention_scorer(const Tensor& memory) const;

  BeamResult decode(const AVSample& sample, const BigramLM* lm, const Vocab& vocab,
                    const DecodeConfig& config) const;

  // V-CAFE mask [T, D1]; avsr_vcafe mode only.
  Tensor mask(const AVSample& sample) const;

 private:
  ModelConfig config_;
  ParamStore store_;
  std::optional<AudioFrontendParams> audio_;
  std::optional<VisualFrontendParams> visual_;
  std::optional<VCafeParams> vcafe_;
  std::optional<FusionParams> baseline_fusion_;
  SeqModelParams seq_;
};

}  // namespace avsr
