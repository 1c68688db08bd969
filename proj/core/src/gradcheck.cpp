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

#include "avsr/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "avsr/error.hpp"

namespace avsr {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double eval_inputs(const std::vector<Tensor>& inputs, const InputLoss& loss) {
  Graph g;
  g.set_grad_enabled(false);
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& t : inputs) vars.push_back(g.constant(t));
  return loss(g, vars).value().item();
}

double eval_params(const ParamStore& params, const ParamLoss& loss) {
  Graph g;
  g.set_grad_enabled(false);
  return loss(g, params).value().item();
}

}  // namespace

double check_input_gradients(const std::vector<Tensor>& inputs, const InputLoss& loss,
                             const GradCheckOptions& options) {
  Graph g;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& t : inputs) vars.push_back(g.input(t));
  g.backward(loss(g, vars));

  std::vector<Tensor> probe = inputs;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const Tensor& analytic = vars[i].grad();
    for (std::size_t k = 0; k < probe[i].numel(); ++k) {
      const double orig = probe[i][k];
      probe[i][k] = orig + options.step;
      const double up = eval_inputs(probe, loss);
      probe[i][k] = orig - options.step;
      const double down = eval_inputs(probe, loss);
      probe[i][k] = orig;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic.empty() ? 0.0 : analytic[k];
      worst = std::max(worst, relative_error(a, numeric, options.floor));
    }
  }
  return worst;
}

std::vector<GroupReport> check_param_gradients(
    ParamStore& params, const ParamLoss& loss,
    const std::function<std::string(std::string_view)>& group_of,
    const GradCheckOptions& options) {
  GradBuffer analytic(params);
  {
    Graph g;
    g.backward(loss(g, params));
    g.collect_param_grads(analytic);
  }
  std::vector<GroupReport> reports;
  for (ParamId id = 0; id < params.size(); ++id) {
    const std::string group = group_of(params[id].name);
    auto it = std::find_if(reports.begin(), reports.end(),
                           [&](const GroupReport& r) { return r.group == group; });
    if (it == reports.end()) {
      reports.push_back(GroupReport{group, 0.0, 0, {}});
      it = reports.end() - 1;
    }
    Tensor& w = params[id].value;
    for (std::size_t k = 0; k < w.numel(); ++k) {
      const double orig = w[k];
      w[k] = orig + options.step;
      const double up = eval_params(params, loss);
      w[k] = orig - options.step;
      const double down = eval_params(params, loss);
      w[k] = orig;
      const double numeric = (up - down) / (2.0 * options.step);
      const double err = relative_error(analytic[id][k], numeric, options.floor);
      if (err > it->max_rel_error || it->worst_param.empty()) {
        if (err >= it->max_rel_error) it->worst_param = params[id].name;
        it->max_rel_error = std::max(it->max_rel_error, err);
      }
      ++it->entries;
    }
  }
  return reports;
}

std::string default_param_group(std::string_view name) {
  const auto first = name.find('.');
  if (first == std::string_view::npos) return std::string(name);
  const auto second = name.find('.', first + 1);
  return std::string(name.substr(0, second));
}

}  // namespace avsr
