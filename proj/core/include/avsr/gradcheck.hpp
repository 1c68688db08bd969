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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avsr/graph.hpp"

namespace avsr {

struct GradCheckOptions {
  double step = 1e-5;
  // Denominator floor of the relative error, so that gradients that are
  // analytically ~0 compare on an absolute scale.
  double floor = 1e-3;
};

// |analytic - numeric| / max(|analytic|, |numeric|, floor)
double relative_error(double analytic, double numeric, double floor);

using InputLoss = std::function<Var(Graph&, std::span<const Var>)>;

// Central finite differences against backward() for every entry of every
// input. Returns the maximum relative error.
double check_input_gradients(const std::vector<Tensor>& inputs, const InputLoss& loss,
                             const GradCheckOptions& options = {});

using ParamLoss = std::function<Var(Graph&, const ParamStore&)>;

struct GroupReport {
  std::string group;
  double max_rel_error = 0.0;
  std::size_t entries = 0;
  std::string worst_param;
};

// Same check for every parameter entry of a store. Results are aggregated
// per group (group_of maps a parameter name to its group), in the order
// groups first appear. `params` is restored before returning.
std::vector<GroupReport> check_param_gradients(
    ParamStore& params, const ParamLoss& loss,
    const std::function<std::string(std::string_view)>& group_of,
    const GradCheckOptions& options = {});

// Group name = parameter name up to the second '.', e.g. "vcafe.mask".
std::string default_param_group(std::string_view name);

}  // namespace avsr
