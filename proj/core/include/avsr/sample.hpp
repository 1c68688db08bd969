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
#include <optional>
#include <string>
#include <vector>

#include "avsr/tensor.hpp"

namespace avsr {

// Per-frame lip features: frames [T, visual_dim].
struct VisualStream {
  Tensor frames;
  std::size_t length() const { return frames.dim(0); }
};

// Log-mel surrogate: spectro [S, audio_dim], four audio frames per video frame.
struct AudioStream {
  Tensor spectro;
  // SNR of the applied corruption; empty for clean audio.
  std::optional<double> snr_db;
  std::size_t length() const { return spectro.dim(0); }
};

struct AVSample {
  std::string id;
  VisualStream visual;
  AudioStream audio;
  // Phoneme indices of the target utterance.
  std::vector<std::size_t> transcript;
  // "clean", "gaussian", "babble" or "overlap".
  std::string noise_kind = "clean";
};

}  // namespace avsr
