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
#include <string_view>
#include <unordered_map>
#include <vector>

#include "avsr/rng.hpp"
#include "avsr/tensor.hpp"

namespace avsr {

using ParamId = std::size_t;

struct Parameter {
  std::string name;
  Tensor value;
};

// Named, enumerable collection of learnable tensors. Insertion order is the
// canonical order for checkpoints and optimizer state.
class ParamStore {
 public:
  ParamId add(std::string name, Tensor value);
  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  ParamId add_uniform(std::string name, Shape shape, std::size_t fan_in, Rng& rng);
  ParamId add_constant(std::string name, Shape shape, double value);

  Parameter& operator[](ParamId id) { return params_[id]; }
  const Parameter& operator[](ParamId id) const { return params_[id]; }

  std::optional<ParamId> find(std::string_view name) const;
  ParamId id(std::string_view name) const;

  std::size_t size() const noexcept { return params_.size(); }
  std::size_t total_elements() const noexcept;

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }

  friend bool operator==(const ParamStore& a, const ParamStore& b) {
    return a.params_.size() == b.params_.size() && [&] {
      for (std::size_t i = 0; i < a.params_.size(); ++i) {
        if (a.params_[i].name != b.params_[i].name || !(a.params_[i].value == b.params_[i].value)) {
          return false;
        }
      }
      return true;
    }();
  }

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, ParamId> index_;
};

// One gradient tensor per parameter, shape-matched to a ParamStore.
class GradBuffer {
 public:
  GradBuffer() = default;
  explicit GradBuffer(const ParamStore& params);

  Tensor& operator[](ParamId id) { return grads_[id]; }
  const Tensor& operator[](ParamId id) const { return grads_[id]; }
  std::size_t size() const noexcept { return grads_.size(); }

  void zero();
  void scale(double factor);
  void add(const GradBuffer& other, double factor = 1.0);
  double global_norm() const;
  bool all_finite() const;

 private:
  std::vector<Tensor> grads_;
};

}  // namespace avsr
