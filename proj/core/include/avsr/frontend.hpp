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
#include "avsr/sample.hpp"

namespace avsr {

// Audio frames per video frame; the audio front-end downsamples by this much.
inline constexpr std::size_t kAudioFramesPerVideoFrame = 4;

struct FrontendConfig {
  std::size_t visual_dim = 16;
  std::size_t audio_dim = 20;
  // Output feature width (D1) of both front-ends.
  std::size_t d1 = 32;
  std::size_t visual_kernel = 3;
  // Both audio convolutions use stride 2.
  std::size_t audio_kernel = 3;
  // Width of the intermediate audio feature map.
  std::size_t audio_hidden = 32;
};

// Two same-padded 1-D convolutions with ReLU, stride 1.
struct VisualFrontendParams {
  ParamId conv1_w, conv1_b, conv2_w, conv2_b;
  static VisualFrontendParams create(ParamStore& store, const FrontendConfig& config, Rng& rng,
                                     const std::string& prefix = "frontend.visual");
};

// Two stride-2 1-D convolutions with ReLU: S audio frames -> S/4 features.
struct AudioFrontendParams {
  ParamId conv1_w, conv1_b, conv2_w, conv2_b;
  std::size_t kernel = 3;
  static AudioFrontendParams create(ParamStore& store, const FrontendConfig& config, Rng& rng,
                                    const std::string& prefix = "frontend.audio");
};

// f_v [T, D1]
Var visual_frontend(Graph& g, Var frames, const ParamStore& store,
                    const VisualFrontendParams& params);
Var visual_frontend(Graph& g, const VisualStream& stream, const ParamStore& store,
                    const VisualFrontendParams& params);

// f_a [ceil(S/4), D1]; input is right-padded with zero frames to a multiple of 4.
Var audio_frontend(Graph& g, Var spectro, const ParamStore& store,
                   const AudioFrontendParams& params);
Var audio_frontend(Graph& g, const AudioStream& stream, const ParamStore& store,
                   const AudioFrontendParams& params);

// Right-pads rows with zeros up to a multiple of `multiple`.
Tensor pad_rows_to_multiple(const Tensor& x, std::size_t multiple);

}  // namespace avsr
