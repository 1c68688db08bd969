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

#include "avsr/seqmodel.hpp"

#include <cmath>

#include "avsr/ctc.hpp"
#include "avsr/error.hpp"
#include "avsr/ops.hpp"
#include "avsr/vocab.hpp"

namespace avsr {

EncoderParams EncoderParams::create(ParamStore& store, const EncoderConfig& config, Rng& rng,
                                    const std::string& prefix) {
  if (config.heads == 0 || config.dim % config.heads != 0) {
    throw ConfigError("encoder heads must divide the hidden dimension");
  }
  same_padding(config.conv_kernel);
  EncoderParams p;
  p.config = config;
  const std::size_t d = config.dim;
  for (std::size_t i = 0; i < config.layers; ++i) {
    const std::string n = prefix + "." + std::to_string(i);
    ConformerBlockParams b;
    b.ff1_norm = LayerNormParams::create(store, n + ".ff1_norm", d);
    b.ff1 = FeedForwardParams::create(store, n + ".ff1", d, config.ff_dim, rng);
    b.attn_norm = LayerNormParams::create(store, n + ".attn_norm", d);
    b.attn = AttentionParams::create(store, n + ".attn", d, config.heads, rng);
    b.conv_norm = LayerNormParams::create(store, n + ".conv_norm", d);
    b.pointwise_in = LinearParams::create(store, n + ".conv.pw_in", d, 2 * d, rng);
    b.depthwise_w =
        store.add_uniform(n + ".conv.dw.w", {config.conv_kernel, d}, config.conv_kernel, rng);
    b.depthwise_b = store.add_uniform(n + ".conv.dw.b", {d}, config.conv_kernel, rng);
    b.depthwise_norm = LayerNormParams::create(store, n + ".conv.dw_norm", d);
    b.pointwise_out = LinearParams::create(store, n + ".conv.pw_out", d, d, rng);
    b.ff2_norm = LayerNormParams::create(store, n + ".ff2_norm", d);
    b.ff2 = FeedForwardParams::create(store, n + ".ff2", d, config.ff_dim, rng);
    b.out_norm = LayerNormParams::create(store, n + ".out_norm", d);
    p.blocks.push_back(b);
  }
  return p;
}

DecoderParams DecoderParams::create(ParamStore& store, const DecoderConfig& config,
                                    std::size_t vocab_size, Rng& rng, const std::string& prefix) {
  if (config.heads == 0 || config.dim % config.heads != 0) {
    throw ConfigError("decoder heads must divide the hidden dimension");
  }
  DecoderParams p;
  p.config = config;
  const std::size_t d = config.dim;
  p.embedding = store.add_uniform(prefix + ".embed", {vocab_size, d}, d, rng);
  for (std::size_t i = 0; i < config.layers; ++i) {
    const std::string n = prefix + "." + std::to_string(i);
    DecoderLayerParams l;
    l.self_norm = LayerNormParams::create(store, n + ".self_norm", d);
    l.self_attn = AttentionParams::create(store, n + ".self_attn", d, config.heads, rng);
    l.cross_norm = LayerNormParams::create(store, n + ".cross_norm", d);
    l.cross_attn = AttentionParams::create(store, n + ".cross_attn", d, config.heads, rng);
    l.ff_norm = LayerNormParams::create(store, n + ".ff_norm", d);
    l.ff = FeedForwardParams::create(store, n + ".ff", d, config.ff_dim, rng);
    p.layers.push_back(l);
  }
  p.out_norm = LayerNormParams::create(store, prefix + ".out_norm", d);
  p.out = LinearParams::create(store, prefix + ".out", d, vocab_size, rng);
  return p;
}

SeqModelParams SeqModelParams::create(ParamStore& store, const EncoderConfig& encoder,
                                      const DecoderConfig& decoder, std::size_t vocab_size,
                                      Rng& rng) {
  if (encoder.dim != decoder.dim) {
    throw ConfigError("encoder and decoder widths must agree");
  }
  SeqModelParams p;
  p.vocab_size = vocab_size;
  p.encoder = EncoderParams::create(store, encoder, rng);
  p.decoder = DecoderParams::create(store, decoder, vocab_size, rng);
  p.ctc_head = LinearParams::create(store, "ctc.head", encoder.dim, vocab_size, rng);
  return p;
}

namespace {

// pointwise -> GLU -> depthwise -> norm -> swish -> pointwise
Var conv_module(Graph& g, Var x, const ParamStore& store, const ConformerBlockParams& b) {
  const std::size_t d = x.value().dim(1);
  Var h = linear(g, x, store, b.pointwise_in);
  h = mul(slice(h, 1, 0, d), sigmoid(slice(h, 1, d, 2 * d)));
  h = add_row(depthwise_conv1d(h, g.param(store, b.depthwise_w)),
              g.param(store, b.depthwise_b));
  h = swish(layer_norm(g, h, store, b.depthwise_norm));
  return linear(g, h, store, b.pointwise_out);
}

}  // namespace

Var encode(Graph& g, Var x, const ParamStore& store, const EncoderParams& params) {
  if (x.value().rank() != 2 || x.value().dim(1) != params.config.dim) {
    throw ShapeError("encode: expected [T, " + std::to_string(params.config.dim) + "], got " +
                     shape_str(x.value().shape()));
  }
  Var h = x;
  if (params.config.positional_encoding) {
    h = add(h, g.constant(sinusoidal_positions(x.value().dim(0), params.config.dim)));
  }
  for (const auto& b : params.blocks) {
    h = add(h, scale(feed_forward(g, layer_norm(g, h, store, b.ff1_norm), store, b.ff1), 0.5));
    Var a = layer_norm(g, h, store, b.attn_norm);
    h = add(h, multi_head_attention(g, a, a, store, b.attn, false));
    h = add(h, conv_module(g, layer_norm(g, h, store, b.conv_norm), store, b));
    h = add(h, scale(feed_forward(g, layer_norm(g, h, store, b.ff2_norm), store, b.ff2), 0.5));
    h = layer_norm(g, h, store, b.out_norm);
  }
  return h;
}

Var decoder_logits(Graph& g, Var memory, std::span<const std::size_t> inputs,
                   const ParamStore& store, const DecoderParams& params) {
  const std::size_t d = params.config.dim;
  Var h = embedding(g.param(store, params.embedding), inputs);
  h = add(scale(h, std::sqrt(static_cast<double>(d))),
          g.constant(sinusoidal_positions(inputs.size(), d)));
  for (const auto& l : params.layers) {
    Var a = layer_norm(g, h, store, l.self_norm);
    h = add(h, multi_head_attention(g, a, a, store, l.self_attn, true));
    h = add(h, multi_head_attention(g, layer_norm(g, h, store, l.cross_norm), memory, store,
                                    l.cross_attn, false));
    h = add(h, feed_forward(g, layer_norm(g, h, store, l.ff_norm), store, l.ff));
  }
  return linear(g, layer_norm(g, h, store, params.out_norm), store, params.out);
}

Var ctc_logits(Graph& g, Var encoded, const ParamStore& store, const SeqModelParams& params) {
  return linear(g, encoded, store, params.ctc_head);
}

Var ctc_objective(Graph& g, Var encoded, std::span<const std::size_t> labels,
                  const ParamStore& store, const SeqModelParams& params) {
  return ctc_loss(ctc_logits(g, encoded, store, params), labels, Vocab::kBlank);
}

Var attention_objective(Graph& g, Var encoded, std::span<const std::size_t> labels,
                        const ParamStore& store, const SeqModelParams& params) {
  if (labels.empty()) throw InvalidArgument("attention_objective: empty target");
  std::vector<std::size_t> inputs{Vocab::kBos};
  inputs.insert(inputs.end(), labels.begin(), labels.end());
  std::vector<std::size_t> targets(labels.begin(), labels.end());
  targets.push_back(Vocab::kEos);
  return cross_entropy(decoder_logits(g, encoded, inputs, store, params.decoder), targets);
}

Var joint_objective(Var attention_loss, Var ctc_loss, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("joint loss weight must lie in [0, 1]");
  if (w == 1.0) return attention_loss;
  if (w == 0.0) return ctc_loss;
  return add(scale(attention_loss, w), scale(ctc_loss, 1.0 - w));
}

JointLoss joint_loss(Graph& g, Var encoded, std::span<const std::size_t> labels,
                     const ParamStore& store, const SeqModelParams& params, double w) {
  JointLoss out;
  out.attention = attention_objective(g, encoded, labels, store, params);
  out.ctc = ctc_objective(g, encoded, labels, store, params);
  out.total = joint_objective(out.attention, out.ctc, w);
  return out;
}

}  // namespace avsr
