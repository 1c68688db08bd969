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

#include "avsr/vcafe.hpp"

#include "avsr/error.hpp"
#include "avsr/layers.hpp"
#include "avsr/ops.hpp"

namespace avsr {

EnhancerParams EnhancerParams::create(ParamStore& store, const VCafeConfig& config, Rng& rng,
                                      const std::string& prefix) {
  const std::size_t d1 = config.d1, d2 = config.d2, k = config.mask_kernel;
  same_padding(k);
  if (config.heads == 0 || d2 % config.heads != 0) {
    throw ConfigError("vcafe heads must divide D2");
  }
  EnhancerParams p;
  p.w_q = store.add_uniform(prefix + ".attn.w_q", {d1, d2}, d1, rng);
  p.w_k = store.add_uniform(prefix + ".attn.w_k", {d1, d2}, d1, rng);
  p.w_v = store.add_uniform(prefix + ".attn.w_v", {d1, d2}, d1, rng);
  p.conv1_w = store.add_uniform(prefix + ".mask.conv1.w", {k, d2, d2}, k * d2, rng);
  p.conv1_b = store.add_uniform(prefix + ".mask.conv1.b", {d2}, k * d2, rng);
  p.conv2_w = store.add_uniform(prefix + ".mask.conv2.w", {k, d2, d1}, k * d2, rng);
  p.conv2_b = store.add_uniform(prefix + ".mask.conv2.b", {d1}, k * d2, rng);
  p.heads = config.heads;
  p.positional_encoding = config.positional_encoding;
  return p;
}

FusionParams FusionParams::create(ParamStore& store, std::size_t d1, Rng& rng,
                                  const std::string& prefix) {
  FusionParams p;
  p.w_f = store.add_uniform(prefix + ".fuse.w", {2 * d1, d1}, 2 * d1, rng);
  p.b_f = store.add_uniform(prefix + ".fuse.b", {d1}, 2 * d1, rng);
  return p;
}

VCafeParams VCafeParams::create(ParamStore& store, const VCafeConfig& config, Rng& rng,
                                const std::string& prefix) {
  VCafeParams p;
  p.enhancer = EnhancerParams::create(store, config, rng, prefix);
  p.fusion = FusionParams::create(store, config.d1, rng, prefix);
  return p;
}

namespace {

void require_same_length(Var a, Var b, const char* op) {
  if (a.value().rank() != 2 || b.value().rank() != 2 || a.value().dim(0) != b.value().dim(0)) {
    throw ShapeError(std::string(op) + ": audio " + shape_str(a.value().shape()) +
                     " and visual " + shape_str(b.value().shape()) +
                     " features must have equal length");
  }
}

}  // namespace

VisualContext visual_context(Graph& g, Var f_a, Var f_v, const ParamStore& store,
                             const EnhancerParams& params) {
  require_same_length(f_a, f_v, "visual_context");
  Var audio = f_a;
  Var visual = f_v;
  if (params.positional_encoding) {
    const Var pe = g.constant(sinusoidal_positions(f_a.value().dim(0), f_a.value().dim(1)));
    audio = add(audio, pe);
    visual = add(visual, pe);
  }
  Var q = matmul(audio, g.param(store, params.w_q));
  Var k = matmul(visual, g.param(store, params.w_k));
  Var v = matmul(visual, g.param(store, params.w_v));
  VisualContext out;
  if (params.heads == 1) {
    out.context = scaled_dot_attention(q, k, v, false, &out.attention);
  } else {
    out.context = split_head_attention(q, k, v, params.heads, false);
    out.attention = Var{};
  }
  return out;
}

Var generate_mask(Graph& g, Var context, const ParamStore& store, const EnhancerParams& params) {
  const Var w1 = g.param(store, params.conv1_w);
  const Var w2 = g.param(store, params.conv2_w);
  const std::size_t pad = same_padding(w1.value().dim(0));
  Var h = relu(add_row(conv1d(context, w1, 1, pad), g.param(store, params.conv1_b)));
  return sigmoid(add_row(conv1d(h, w2, 1, pad), g.param(store, params.conv2_b)));
}

Var enhance(Var f_a, Var mask) {
  if (f_a.value().shape() != mask.value().shape()) {
    throw ShapeError("enhance: features " + shape_str(f_a.value().shape()) + " vs mask " +
                     shape_str(mask.value().shape()));
  }
  return add(mul(f_a, mask), f_a);
}

Var fuse(Graph& g, Var audio, Var f_v, const ParamStore& store, const FusionParams& params) {
  require_same_length(audio, f_v, "fuse");
  Var joined = concat(audio, f_v, 1);
  return add_row(matmul(joined, g.param(store, params.w_f)), g.param(store, params.b_f));
}

VCafeOutput vcafe_forward(Graph& g, Var f_a, Var f_v, const ParamStore& store,
                          const VCafeParams& params) {
  VCafeOutput out;
  out.context = visual_context(g, f_a, f_v, store, params.enhancer);
  out.mask = generate_mask(g, out.context.context, store, params.enhancer);
  out.enhanced = enhance(f_a, out.mask);
  out.fused = fuse(g, out.enhanced, f_v, store, params.fusion);
  return out;
}

}  // namespace avsr
