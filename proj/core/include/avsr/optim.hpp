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
#include <vector>

#include "avsr/params.hpp"

namespace avsr {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Adam with decoupled weight decay. Moment buffers are shape-matched to the
// ParamStore given at construction.
class AdamW {
 public:
  AdamW(const ParamStore& params, AdamWConfig config);

  void step(ParamStore& params, const GradBuffer& grads);
  std::size_t steps() const noexcept { return steps_; }
  const AdamWConfig& config() const noexcept { return config_; }
  void set_lr(double lr) noexcept { config_.lr = lr; }

 private:
  AdamWConfig config_;
  std::vector<Tensor> m_, v_;
  std::size_t steps_ = 0;
};

}  // namespace avsr
