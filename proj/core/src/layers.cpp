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

#include "avsr/layers.hpp"

#include <cmath>

#include "avsr/error.hpp"
#include "avsr/ops.hpp"

namespace avsr {

LinearParams LinearParams::create(ParamStore& store, const std::string& name, std::size_t in,
                                  std::size_t out, Rng& rng, bool bias) {
  LinearParams p;
  p.w = store.add_uniform(name + ".w", {in, out}, in, rng);
  p.has_bias = bias;
  if (bias) p.b = store.add_uniform(name + ".b", {out}, in, rng);
  return p;
}

Var linear(Graph& g, Var x, const ParamStore& store, const LinearParams& p) {
  Var y = matmul(x, g.param(store, p.w));
  return p.has_bias ? add_row(y, g.param(store, p.b)) : y;
}

LayerNormParams LayerNormParams::create(ParamStore& store, const std::string& name,
                                        std::size_t dim) {
  LayerNormParams p;
  p.gamma = store.add_constant(name + ".gamma", {dim}, 1.0);
  p.beta = store.add_constant(name + ".beta", {dim}, 0.0);
  return p;
}

Var layer_norm(Graph& g, Var x, const ParamStore& store, const LayerNormParams& p) {
  Var n = layernorm(x, x.value().rank() - 1);
  return add_row(mul_row(n, g.param(store, p.gamma)), g.param(store, p.beta));
}

Var scaled_dot_attention(Var q, Var k, Var v, bool causal, Var* weights) {
  const double d = static_cast<double>(q.value().shape().back());
  Var scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(d));
  if (causal) scores = causal_mask(scores);
  Var attn = softmax(scores, scores.value().rank() - 1);
  if (weights) *weights = attn;
  return matmul(attn, v);
}

Var split_head_attention(Var q, Var k, Var v, std::size_t heads, bool causal) {
  const std::size_t dim = q.value().shape().back();
  if (heads == 0 || dim % heads != 0) {
    throw InvalidArgument("attention: " + std::to_string(heads) + " heads do not divide width " +
                          std::to_string(dim));
  }
  if (heads == 1) return scaled_dot_attention(q, k, v, causal);
  const std::size_t hd = dim / heads;
  const std::size_t axis = q.value().rank() - 1;
  Var out{};
  for (std::size_t h = 0; h < heads; ++h) {
    Var head = scaled_dot_attention(slice(q, axis, h * hd, (h + 1) * hd),
                                    slice(k, axis, h * hd, (h + 1) * hd),
                                    slice(v, axis, h * hd, (h + 1) * hd), causal);
    out = h == 0 ? head : concat(out, head, axis);
  }
  return out;
}

AttentionParams AttentionParams::create(ParamStore& store, const std::string& name,
                                        std::size_t dim, std::size_t heads, Rng& rng) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("attention heads (" + std::to_string(heads) + ") must divide width " +
                      std::to_string(dim));
  }
  AttentionParams p;
  p.q = LinearParams::create(store, name + ".q", dim, dim, rng);
  p.k = LinearParams::create(store, name + ".k", dim, dim, rng);
  p.v = LinearParams::create(store, name + ".v", dim, dim, rng);
  p.out = LinearParams::create(store, name + ".out", dim, dim, rng);
  p.heads = heads;
  return p;
}

Var multi_head_attention(Graph& g, Var query, Var memory, const ParamStore& store,
                         const AttentionParams& p, bool causal) {
  Var q = linear(g, query, store, p.q);
  Var k = linear(g, memory, store, p.k);
  Var v = linear(g, memory, store, p.v);
  return linear(g, split_head_attention(q, k, v, p.heads, causal), store, p.out);
}

FeedForwardParams FeedForwardParams::create(ParamStore& store, const std::string& name,
                                            std::size_t dim, std::size_t hidden, Rng& rng) {
  FeedForwardParams p;
  p.in = LinearParams::create(store, name + ".in", dim, hidden, rng);
  p.out = LinearParams::create(store, name + ".out", hidden, dim, rng);
  return p;
}

Var feed_forward(Graph& g, Var x, const ParamStore& store, const FeedForwardParams& p) {
  return linear(g, swish(linear(g, x, store, p.in)), store, p.out);
}

Tensor sinusoidal_positions(std::size_t len, std::size_t dim) {
  Tensor pe({len, dim});
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
      pe(t, i) = (i % 2 == 0) ? std::sin(static_cast<double>(t) * rate)
                              : std::cos(static_cast<double>(t) * rate);
    }
  }
  return pe;
}

}  // namespace avsr
