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
#include <string>

#include "avsr/graph.hpp"
#include "avsr/rng.hpp"

namespace avsr {

struct LinearParams {
  ParamId w = 0;
  ParamId b = 0;
  bool has_bias = true;
  static LinearParams create(ParamStore& store, const std::string& name, std::size_t in,
                             std::size_t out, Rng& rng, bool bias = true);
};

// x [..., in] -> [..., out]
Var linear(Graph& g, Var x, const ParamStore& store, const LinearParams& p);

struct LayerNormParams {
  ParamId gamma = 0;
  ParamId beta = 0;
  static LayerNormParams create(ParamStore& store, const std::string& name, std::size_t dim);
};

// Normalizes the last axis, then applies the learned affine.
Var layer_norm(Graph& g, Var x, const ParamStore& store, const LayerNormParams& p);

// softmax(q k^T / sqrt(d_k)) v over one head. With `causal`, query i only
// sees keys j <= i. When `weights` is non-null it receives the attention map.
Var scaled_dot_attention(Var q, Var k, Var v, bool causal, Var* weights = nullptr);

// Splits q/k/v columns into `heads` equal groups, attends per head and
// concatenates the head outputs.
Var split_head_attention(Var q, Var k, Var v, std::size_t heads, bool causal);

struct AttentionParams {
  LinearParams q, k, v, out;
  std::size_t heads = 1;
  static AttentionParams create(ParamStore& store, const std::string& name, std::size_t dim,
                                std::size_t heads, Rng& rng);
};

Var multi_head_attention(Graph& g, Var query, Var memory, const ParamStore& store,
                         const AttentionParams& p, bool causal);

struct FeedForwardParams {
  LinearParams in, out;
  static FeedForwardParams create(ParamStore& store, const std::string& name, std::size_t dim,
                                  std::size_t hidden, Rng& rng);
};

// linear -> swish -> linear
Var feed_forward(Graph& g, Var x, const ParamStore& store, const FeedForwardParams& p);

// Standard sin/cos absolute position table [len, dim].
Tensor sinusoidal_positions(std::size_t len, std::size_t dim);

}  // namespace avsr
