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

#include "avsr/model.hpp"

#include "avsr/error.hpp"
#include "avsr/ops.hpp"
#include "avsr/rng.hpp"

namespace avsr {

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kAsr: return "asr";
    case Mode::kVsr: return "vsr";
    case Mode::kAvsrBaseline: return "avsr_baseline";
    case Mode::kAvsrVcafe: return "avsr_vcafe";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::kAsr, Mode::kVsr, Mode::kAvsrBaseline, Mode::kAvsrVcafe}) {
    if (mode_name(m) == name) return m;
  }
  throw ConfigError("unknown model mode '" + std::string(name) +
                    "' (expected asr, vsr, avsr_baseline or avsr_vcafe)");
}

bool uses_audio(Mode mode) { return mode != Mode::kVsr; }
bool uses_video(Mode mode) { return mode != Mode::kAsr; }

void validate(const ModelConfig& config) {
  const std::size_t d1 = config.frontend.d1;
  if (d1 == 0 || config.vcafe.d2 == 0) throw ConfigError("D1 and D2 must be positive");
  if (config.encoder.dim != d1) {
    throw ConfigError("encoder dim (" + std::to_string(config.encoder.dim) +
                      ") must equal D1 (" + std::to_string(d1) + ")");
  }
  if (config.decoder.dim != config.encoder.dim) {
    throw ConfigError("decoder dim must equal encoder dim");
  }
  for (std::size_t heads : {config.encoder.heads, config.decoder.heads}) {
    if (heads == 0 || config.encoder.dim % heads != 0) {
      throw ConfigError("attention heads must divide the model dim");
    }
  }
  if (config.vcafe.heads == 0 || config.vcafe.d2 % config.vcafe.heads != 0) {
    throw ConfigError("V-CAFE heads must divide D2");
  }
  if (config.encoder.layers == 0) throw ConfigError("encoder needs at least one layer");
}

std::vector<std::size_t> transcript_tokens(const AVSample& sample, const Vocab& vocab) {
  return vocab.tokens_of_content(sample.transcript);
}

AvsrModel::AvsrModel(const ModelConfig& config, std::size_t vocab_size, std::uint64_t seed)
    : config_(config) {
  validate(config_);
  const Mode m = config_.mode;
  if (uses_audio(m)) {
    Rng rng = make_rng(seed, "init.frontend.audio");
    audio_ = AudioFrontendParams::create(store_, config_.frontend, rng);
  }
  if (uses_video(m)) {
    Rng rng = make_rng(seed, "init.frontend.visual");
    visual_ = VisualFrontendParams::create(store_, config_.frontend, rng);
  }
  if (m == Mode::kAvsrVcafe) {
    VCafeConfig vc = config_.vcafe;
    vc.d1 = config_.frontend.d1;
    Rng rng = make_rng(seed, "init.vcafe");
    vcafe_ = VCafeParams::create(store_, vc, rng);
  } else if (m == Mode::kAvsrBaseline) {
    Rng rng = make_rng(seed, "init.vcafe");
    baseline_fusion_ = FusionParams::create(store_, config_.frontend.d1, rng, "baseline");
  }
  Rng rng = make_rng(seed, "init.seqmodel");
  seq_ = SeqModelParams::create(store_, config_.encoder, config_.decoder, vocab_size, rng);
}

AvsrModel::Forward AvsrModel::forward(Graph& g, const AVSample& sample,
                                      const ParamStore* store) const {
  const ParamStore& s = store ? *store : store_;
  Forward out;
  if (audio_) out.f_a = audio_frontend(g, sample.audio, s, *audio_);
  if (visual_) out.f_v = visual_frontend(g, sample.visual, s, *visual_);
  switch (config_.mode) {
    case Mode::kAsr:
      out.encoder_input = out.f_a;
      break;
    case Mode::kVsr:
      out.encoder_input = out.f_v;
      break;
    case Mode::kAvsrBaseline:
      out.encoder_input = fuse(g, out.f_a, out.f_v, s, *baseline_fusion_);
      break;
    case Mode::kAvsrVcafe:
      out.vcafe = vcafe_forward(g, out.f_a, out.f_v, s, *vcafe_);
      out.encoder_input = out.vcafe->fused;
      break;
  }
  out.encoded = encode(g, out.encoder_input, s, seq_.encoder);
  return out;
}

JointLoss AvsrModel::loss(Graph& g, const AVSample& sample, std::span<const std::size_t> labels,
                          double w, const ParamStore* store, const FeatureHook& hook) const {
  const ParamStore& s = store ? *store : store_;
  Var encoded = forward(g, sample, &s).encoded;
  if (hook) encoded = hook(g, encoded);
  return joint_loss(g, encoded, labels, s, seq_, w);
}

AvsrModel::DecodeInputs AvsrModel::decode_inputs(const AVSample& sample) const {
  Graph g;
  g.set_grad_enabled(false);
  Var encoded = forward(g, sample).encoded;
  DecodeInputs in;
  in.ctc_log_probs = log_softmax(ctc_logits(g, encoded, store_, seq_), 1).value();
  in.memory = encoded.value();
  return in;
}

NextTokenScorer AvsrModel::attention_scorer(const Tensor& memory) const {
  return [this, &memory](std::span<const std::size_t> prefix) {
    Graph g;
    g.set_grad_enabled(false);
    std::vector<std::size_t> inputs;
    inputs.reserve(prefix.size() + 1);
    inputs.push_back(Vocab::kBos);
    inputs.insert(inputs.end(), prefix.begin(), prefix.end());
    Var logits = decoder_logits(g, g.constant(memory), inputs, store_, seq_.decoder);
    Var last = log_softmax(slice(logits, 0, prefix.size(), prefix.size() + 1), 1);
    const auto row = last.value().data();
    return std::vector<double>(row.begin(), row.end());
  };
}

BeamResult AvsrModel::decode(const AVSample& sample, const BigramLM* lm, const Vocab& vocab,
                             const DecodeConfig& config) const {
  if (vocab.size() != seq_.vocab_size) {
    throw ConfigError("vocabulary size " + std::to_string(vocab.size()) +
                      " does not match the model (" + std::to_string(seq_.vocab_size) + ")");
  }
  const DecodeInputs in = decode_inputs(sample);
  return beam_search(in.ctc_log_probs, attention_scorer(in.memory), lm, vocab, config);
}

Tensor AvsrModel::mask(const AVSample& sample) const {
  if (config_.mode != Mode::kAvsrVcafe) {
    throw ConfigError("mask is only defined in avsr_vcafe mode");
  }
  Graph g;
  g.set_grad_enabled(false);
  return forward(g, sample).vcafe->mask.value();
}

}  // namespace avsr
