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
#include <span>
#include <string>
#include <vector>

#include "avsr/graph.hpp"
#include "avsr/layers.hpp"
#include "avsr/rng.hpp"

namespace avsr {

struct EncoderConfig {
  std::size_t layers = 2;
  std::size_t dim = 32;
  std::size_t ff_dim = 64;
  std::size_t heads = 2;
  std::size_t conv_kernel = 7;
  bool positional_encoding = true;
};

struct DecoderConfig {
  std::size_t layers = 2;
  std::size_t dim = 32;
  std::size_t ff_dim = 64;
  std::size_t heads = 2;
};

// Macaron block: half-step FF, self-attention, convolution module, half-step
// FF, final layer norm. Every sub-module is pre-normalized and residual.
struct ConformerBlockParams {
  LayerNormParams ff1_norm;
  FeedForwardParams ff1;
  LayerNormParams attn_norm;
  AttentionParams attn;
  LayerNormParams conv_norm;
  LinearParams pointwise_in;  // D -> 2D, followed by GLU
  ParamId depthwise_w = 0;    // [k, D]
  ParamId depthwise_b = 0;    // [D]
  LayerNormParams depthwise_norm;
  LinearParams pointwise_out;  // D -> D
  LayerNormParams ff2_norm;
  FeedForwardParams ff2;
  LayerNormParams out_norm;
};

struct EncoderParams {
  EncoderConfig config;
  std::vector<ConformerBlockParams> blocks;
  static EncoderParams create(ParamStore& store, const EncoderConfig& config, Rng& rng,
                              const std::string& prefix = "encoder");
};

struct DecoderLayerParams {
  LayerNormParams self_norm;
  AttentionParams self_attn;
  LayerNormParams cross_norm;
  AttentionParams cross_attn;
  LayerNormParams ff_norm;
  FeedForwardParams ff;
};

struct DecoderParams {
  DecoderConfig config;
  ParamId embedding = 0;  // [V, D]
  std::vector<DecoderLayerParams> layers;
  LayerNormParams out_norm;
  LinearParams out;  // D -> V
  static DecoderParams create(ParamStore& store, const DecoderConfig& config,
                              std::size_t vocab_size, Rng& rng,
                              const std::string& prefix = "decoder");
};

struct SeqModelParams {
  EncoderParams encoder;
  DecoderParams decoder;
  LinearParams ctc_head;  // D -> V
  std::size_t vocab_size = 0;
  static SeqModelParams create(ParamStore& store, const EncoderConfig& encoder,
                               const DecoderConfig& decoder, std::size_t vocab_size, Rng& rng);
};

// Length-preserving Conformer encoder: [T, D] -> [T, D].
Var encode(Graph& g, Var x, const ParamStore& store, const EncoderParams& params);

// Decoder logits [L, V] for the given input tokens (starting with bos), with
// causal self-attention and full cross-attention over `memory`.
Var decoder_logits(Graph& g, Var memory, std::span<const std::size_t> inputs,
                   const ParamStore& store, const DecoderParams& params);

// CTC head logits [T, V].
Var ctc_logits(Graph& g, Var encoded, const ParamStore& store, const SeqModelParams& params);

// -log p_c(y|x); `labels` are content token ids.
Var ctc_objective(Graph& g, Var encoded, std::span<const std::size_t> labels,
                  const ParamStore& store, const SeqModelParams& params);

// Teacher-forced -log p_a(y|x) over y followed by eos.
Var attention_objective(Graph& g, Var encoded, std::span<const std::size_t> labels,
                        const ParamStore& store, const SeqModelParams& params);

// Mixture w * attention + (1 - w) * CTC of two computed objectives.
Var joint_objective(Var attention_loss, Var ctc_loss, double w);

struct JointLoss {
  Var total;
  Var attention;
  Var ctc;
};

JointLoss joint_loss(Graph& g, Var encoded, std::span<const std::size_t> labels,
                     const ParamStore& store, const SeqModelParams& params, double w);

}  // namespace avsr
