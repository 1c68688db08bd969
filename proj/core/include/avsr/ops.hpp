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

// Value used for masked attention scores; finite so every intermediate stays
// finite, and exp() of it underflows to exactly zero after max-subtraction.
inline constexpr double kMaskedScore = -1e30;

// Matrix product over the last two axes, [..., M, K] x [..., K, N]. Leading
// (batch) axes broadcast numpy-style.
Var matmul(Var a, Var b);
// Swaps the last two axes.
Var transpose(Var x);

// Elementwise arithmetic. Operands have equal shapes, or one side is a
// single-element tensor that broadcasts.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);

// Broadcast a length-N vector over the last axis of x.
Var add_row(Var x, Var row);
Var mul_row(Var x, Var row);

Var relu(Var x);
Var sigmoid(Var x);
// x * sigmoid(x)
Var swish(Var x);

Var softmax(Var x, std::size_t axis);
Var log_softmax(Var x, std::size_t axis);
// Normalizes slices along `axis` to zero mean and unit variance (no affine).
Var layernorm(Var x, std::size_t axis, double eps = 1e-5);

// x [T, C_in], kernel [k, C_in, C_out] -> [T', C_out] with
// T' = floor((T + 2*padding - k) / stride) + 1.
Var conv1d(Var x, Var kernel, std::size_t stride, std::size_t padding);
// Padding that keeps the length unchanged at stride 1; k must be odd.
std::size_t same_padding(std::size_t kernel_size);
// Per-channel convolution: x [T, C], kernel [k, C], stride 1, same padding.
Var depthwise_conv1d(Var x, Var kernel);

Var concat(Var a, Var b, std::size_t axis);
Var slice(Var x, std::size_t axis, std::size_t begin, std::size_t end);
// Rows of table [V, D] selected by ids -> [ids.size(), D].
Var embedding(Var table, std::span<const std::size_t> ids);

Var sum(Var x);
Var mean(Var x);

// Replaces entries above the diagonal of the trailing [L, L] block by
// kMaskedScore.
Var causal_mask(Var scores);

// Sum over rows of -log softmax(logits)[row, target[row]].
Var cross_entropy(Var logits, std::span<const std::size_t> targets);

}  // namespace avsr
