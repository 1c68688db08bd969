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

#include "avsr/graph.hpp"

#include "avsr/error.hpp"

namespace avsr {

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Graph::constant(Tensor value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::input(Tensor value) {
  Node n;
  n.op = "input";
  n.value = std::move(value);
  n.requires_grad = grad_enabled_;
  return push(std::move(n));
}

Var Graph::param(const ParamStore& store, ParamId id) {
  if (auto it = param_nodes_.find(id); it != param_nodes_.end()) return Var{this, it->second};
  Node n;
  n.op = "param";
  n.value = store[id].value;
  n.requires_grad = grad_enabled_;
  n.param = static_cast<std::ptrdiff_t>(id);
  Var v = push(std::move(n));
  param_nodes_.emplace(id, v.id);
  return v;
}

Var Graph::record(std::string_view op, Tensor value, std::vector<NodeId> inputs,
                  BackwardFn backward) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  if (grad_enabled_) {
    for (NodeId in : inputs) {
      if (nodes_[in].requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
  }
  if (n.requires_grad) {
    n.inputs = std::move(inputs);
    n.backward = std::move(backward);
  }
  return push(std::move(n));
}

Tensor* Graph::accum(NodeId id) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) n.grad = Tensor::zeros_like(n.value);
  return &n.grad;
}

void Graph::backward(Var loss) {
  if (loss.graph != this) throw InvalidArgument("loss belongs to a different graph");
  if (nodes_[loss.id].value.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " +
                     shape_str(nodes_[loss.id].value.shape()));
  }
  if (backward_done_) throw InvalidArgument("backward() already ran on this graph");
  backward_done_ = true;
  if (!nodes_[loss.id].requires_grad) return;
  accum(loss.id)->fill(1.0);
  for (NodeId i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, i);
  }
}

void Graph::collect_param_grads(GradBuffer& out) const {
  for (const auto& [pid, nid] : param_nodes_) {
    const Node& n = nodes_[nid];
    if (!n.grad.empty()) out[pid].add_inplace(n.grad);
  }
}

}  // namespace avsr
