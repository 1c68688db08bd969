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

struct VCafeConfig {
  std::size_t d1 = 32;
  std::size_t d2 = 16;
  // Temporal kernel of both mask-generator convolutions (odd, same padding).
  std::size_t mask_kernel = 3;
  std::size_t heads = 1;
  // Adds sinusoidal positions to f_a and f_v before cross-modal attention.
  bool positional_encoding = false;
};

// Learnable weights of the enhancement path: cross-modal projections and the
// two-convolution mask generator.
struct EnhancerParams {
  ParamId w_q = 0, w_k = 0, w_v = 0;
  ParamId conv1_w = 0, conv1_b = 0;  // [k, D2, D2], [D2]
  ParamId conv2_w = 0, conv2_b = 0;  // [k, D2, D1], [D1]
  std::size_t heads = 1;
  bool positional_encoding = false;
  static EnhancerParams create(ParamStore& store, const VCafeConfig& config, Rng& rng,
                               const std::string& prefix = "vcafe");
};

// Audio-visual fusion: W_f [2 D1, D1], b_f [D1].
struct FusionParams {
  ParamId w_f = 0, b_f = 0;
  static FusionParams create(ParamStore& store, std::size_t d1, Rng& rng,
                             const std::string& prefix = "vcafe");
};

struct VCafeParams {
  EnhancerParams enhancer;
  FusionParams fusion;
  static VCafeParams create(ParamStore& store, const VCafeConfig& config, Rng& rng,
                            const std::string& prefix = "vcafe");
};

struct VisualContext {
  Var context;    // C [T, D2]
  Var attention;  // [T, T] (single head) row-stochastic weights
};

// Each audio frame queries the whole lip sequence:
// C^t = softmax(Q^t K^T / sqrt(D2)) V with Q = f_a W_q, K = f_v W_k, V = f_v W_v.
VisualContext visual_context(Graph& g, Var f_a, Var f_v, const ParamStore& store,
                             const EnhancerParams& params);

// m = sigmoid(conv(relu(conv(C)))) in (0, 1), shape [T, D1].
Var generate_mask(Graph& g, Var context, const ParamStore& store, const EnhancerParams& params);

// f_a * m + f_a
Var enhance(Var f_a, Var mask);

// (f_hat_a || f_v) W_f + b_f
Var fuse(Graph& g, Var audio, Var f_v, const ParamStore& store, const FusionParams& params);

struct VCafeOutput {
  VisualContext context;
  Var mask;
  Var enhanced;
  Var fused;
};

VCafeOutput vcafe_forward(Graph& g, Var f_a, Var f_v, const ParamStore& store,
                          const VCafeParams& params);

}  // namespace avsr
