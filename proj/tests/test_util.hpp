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

#include <cstdint>
#include <random>

#include "avsr/graph.hpp"
#include "avsr/ops.hpp"
#include "avsr/tensor.hpp"

namespace avsr::testing {

inline Tensor random_tensor(Shape shape, std::uint64_t seed, double stddev = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

// Scalar probe loss: sum(x * w) with fixed random weights, so every output
// entry contributes with a distinct, nonzero sensitivity.
inline Var probe_loss(Graph& g, Var x, std::uint64_t seed = 99) {
  return sum(mul(x, g.constant(random_tensor(x.value().shape(), seed))));
}

}  // namespace avsr::testing
