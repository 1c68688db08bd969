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

#include "avsr/optim.hpp"

#include <cmath>

#include "avsr/error.hpp"

namespace avsr {

AdamW::AdamW(const ParamStore& params, AdamWConfig config) : config_(config) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.push_back(Tensor::zeros_like(p.value));
    v_.push_back(Tensor::zeros_like(p.value));
  }
}

void AdamW::step(ParamStore& params, const GradBuffer& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeError("AdamW: parameter count changed since construction");
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  const double decay = 1.0 - config_.lr * config_.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& w = params[i].value;
    const Tensor& g = grads[i];
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    if (g.shape() != w.shape()) {
      throw ShapeError("AdamW: gradient shape mismatch for '" + params[i].name + "'");
    }
    for (std::size_t k = 0; k < w.numel(); ++k) {
      w[k] *= decay;
      m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g[k];
      v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g[k] * g[k];
      const double mh = m[k] / c1;
      const double vh = v[k] / c2;
      w[k] -= config_.lr * mh / (std::sqrt(vh) + config_.eps);
    }
  }
}

}  // namespace avsr
