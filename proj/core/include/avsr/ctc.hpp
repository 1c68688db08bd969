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

#include "avsr/graph.hpp"

namespace avsr {

// Fewest frames that can emit `labels`: one per label plus a blank between
// each pair of equal neighbours.
std::size_t ctc_min_frames(std::span<const std::size_t> labels);

// log p(labels | x) from per-frame log-probabilities [T, V], by the forward
// recursion over the blank-interleaved label sequence. Throws
// InfeasibleAlignment when T < ctc_min_frames(labels).
double ctc_log_likelihood(const Tensor& log_probs, std::span<const std::size_t> labels,
                          std::size_t blank = 0);

// -log p(labels | x) for unnormalized logits [T, V]. The backward pass uses
// the alpha-beta occupancies: dL/dz = softmax(z) - gamma.
Var ctc_loss(Var logits, std::span<const std::size_t> labels, std::size_t blank = 0);

}  // namespace avsr
