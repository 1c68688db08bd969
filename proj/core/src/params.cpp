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

#include "avsr/params.hpp"

#include <cmath>

#include "avsr/error.hpp"

namespace avsr {

ParamId ParamStore::add(std::string name, Tensor value) {
  if (index_.contains(name)) throw InvalidArgument("duplicate parameter name '" + name + "'");
  const ParamId id = params_.size();
  index_.emplace(name, id);
  params_.push_back(Parameter{std::move(name), std::move(value)});
  return id;
}

ParamId ParamStore::add_uniform(std::string name, Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = dist(rng);
  return add(std::move(name), std::move(t));
}

ParamId ParamStore::add_constant(std::string name, Shape shape, double value) {
  return add(std::move(name), Tensor(std::move(shape), value));
}

std::optional<ParamId> ParamStore::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ParamId ParamStore::id(std::string_view name) const {
  auto found = find(name);
  if (!found) throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
  return *found;
}

std::size_t ParamStore::total_elements() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

GradBuffer::GradBuffer(const ParamStore& params) {
  grads_.reserve(params.size());
  for (const auto& p : params) grads_.push_back(Tensor::zeros_like(p.value));
}

void GradBuffer::zero() {
  for (auto& g : grads_) g.fill(0.0);
}

void GradBuffer::scale(double factor) {
  for (auto& g : grads_) {
    for (auto& v : g.data()) v *= factor;
  }
}

void GradBuffer::add(const GradBuffer& other, double factor) {
  if (other.grads_.size() != grads_.size()) throw ShapeError("gradient buffers differ in size");
  for (std::size_t i = 0; i < grads_.size(); ++i) grads_[i].add_inplace(other.grads_[i], factor);
}

double GradBuffer::global_norm() const {
  double s = 0.0;
  for (const auto& g : grads_) {
    for (double v : g.data()) s += v * v;
  }
  return std::sqrt(s);
}

bool GradBuffer::all_finite() const {
  for (const auto& g : grads_) {
    if (!g.all_finite()) return false;
  }
  return true;
}

}  // namespace avsr
