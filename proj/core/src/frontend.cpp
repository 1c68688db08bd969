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

#include "avsr/frontend.hpp"

#include <algorithm>

#include "avsr/error.hpp"
#include "avsr/ops.hpp"

namespace avsr {

VisualFrontendParams VisualFrontendParams::create(ParamStore& store, const FrontendConfig& config,
                                                  Rng& rng, const std::string& prefix) {
  const std::size_t k = config.visual_kernel;
  same_padding(k);
  VisualFrontendParams p;
  p.conv1_w = store.add_uniform(prefix + ".conv1.w", {k, config.visual_dim, config.d1},
                                k * config.visual_dim, rng);
  p.conv1_b = store.add_uniform(prefix + ".conv1.b", {config.d1}, k * config.visual_dim, rng);
  p.conv2_w = store.add_uniform(prefix + ".conv2.w", {k, config.d1, config.d1}, k * config.d1, rng);
  p.conv2_b = store.add_uniform(prefix + ".conv2.b", {config.d1}, k * config.d1, rng);
  return p;
}

AudioFrontendParams AudioFrontendParams::create(ParamStore& store, const FrontendConfig& config,
                                                Rng& rng, const std::string& prefix) {
  const std::size_t k = config.audio_kernel;
  same_padding(k);
  AudioFrontendParams p;
  p.kernel = k;
  p.conv1_w = store.add_uniform(prefix + ".conv1.w", {k, config.audio_dim, config.audio_hidden},
                                k * config.audio_dim, rng);
  p.conv1_b =
      store.add_uniform(prefix + ".conv1.b", {config.audio_hidden}, k * config.audio_dim, rng);
  p.conv2_w = store.add_uniform(prefix + ".conv2.w", {k, config.audio_hidden, config.d1},
                                k * config.audio_hidden, rng);
  p.conv2_b = store.add_uniform(prefix + ".conv2.b", {config.d1}, k * config.audio_hidden, rng);
  return p;
}

Var visual_frontend(Graph& g, Var frames, const ParamStore& store,
                    const VisualFrontendParams& params) {
  const Var w1 = g.param(store, params.conv1_w);
  const Var w2 = g.param(store, params.conv2_w);
  const std::size_t pad = same_padding(w1.value().dim(0));
  Var h = relu(add_row(conv1d(frames, w1, 1, pad), g.param(store, params.conv1_b)));
  return relu(add_row(conv1d(h, w2, 1, pad), g.param(store, params.conv2_b)));
}

Var visual_frontend(Graph& g, const VisualStream& stream, const ParamStore& store,
                    const VisualFrontendParams& params) {
  return visual_frontend(g, g.constant(stream.frames), store, params);
}

Var audio_frontend(Graph& g, Var spectro, const ParamStore& store,
                   const AudioFrontendParams& params) {
  if (spectro.value().dim(0) % kAudioFramesPerVideoFrame != 0) {
    throw ShapeError("audio_frontend: " + std::to_string(spectro.value().dim(0)) +
                     " frames is not a multiple of " + std::to_string(kAudioFramesPerVideoFrame));
  }
  const std::size_t pad = same_padding(params.kernel);
  Var h = relu(add_row(conv1d(spectro, g.param(store, params.conv1_w), 2, pad),
                       g.param(store, params.conv1_b)));
  return relu(add_row(conv1d(h, g.param(store, params.conv2_w), 2, pad),
                      g.param(store, params.conv2_b)));
}

Var audio_frontend(Graph& g, const AudioStream& stream, const ParamStore& store,
                   const AudioFrontendParams& params) {
  return audio_frontend(g, g.constant(pad_rows_to_multiple(stream.spectro,
                                                           kAudioFramesPerVideoFrame)),
                        store, params);
}

Tensor pad_rows_to_multiple(const Tensor& x, std::size_t multiple) {
  if (x.rank() != 2) throw ShapeError("pad_rows_to_multiple: rank-2 input required");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  const std::size_t padded = (rows + multiple - 1) / multiple * multiple;
  if (padded == rows) return x;
  Tensor out({padded, cols});
  std::copy(x.data().begin(), x.data().end(), out.data().begin());
  return out;
}

}  // namespace avsr
