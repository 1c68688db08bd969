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
#include <string_view>
#include <unordered_map>
#include <vector>

#include "avsr/params.hpp"
#include "avsr/tensor.hpp"

namespace avsr {

using NodeId = std::size_t;
class Graph;

// Handle to a node of a Graph: the differentiable view of a Tensor.
struct Var {
  Graph* graph = nullptr;
  NodeId id = 0;

  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
};

// Define-by-run tape. Records are appended in execution order, so the record
// list is topologically sorted by construction; backward() walks it once in
// reverse.
class Graph {
 public:
  // Called with the graph and the id of the node being differentiated; reads
  // grad(out) and accumulates into accum(input).
  using BackwardFn = std::function<void(Graph&, NodeId out)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaf that does not receive gradients.
  Var constant(Tensor value);
  // Leaf that receives gradients (readable via Var::grad after backward).
  Var input(Tensor value);
  // Leaf bound to a stored parameter. Repeated calls for the same id return
  // the same node.
  Var param(const ParamStore& store, ParamId id);

  // Appends an operation record. The backward function is dropped when no
  // input requires gradients or gradient recording is disabled.
  Var record(std::string_view op, Tensor value, std::vector<NodeId> inputs, BackwardFn backward);

  // Populates grads of every node reachable from a scalar loss.
  void backward(Var loss);
  // Adds the gradients of parameter leaves into `out`.
  void collect_param_grads(GradBuffer& out) const;

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  // Gradient of a node; empty tensor when none flowed into it.
  const Tensor& grad(NodeId id) const { return nodes_[id].grad; }
  // Gradient slot of an input, zero-initialized on first use. Returns nullptr
  // for nodes that do not require gradients.
  Tensor* accum(NodeId id);
  bool requires_grad(NodeId id) const { return nodes_[id].requires_grad; }
  std::string_view op(NodeId id) const { return nodes_[id].op; }

  std::size_t size() const noexcept { return nodes_.size(); }
  void set_grad_enabled(bool enabled) noexcept { grad_enabled_ = enabled; }
  bool grad_enabled() const noexcept { return grad_enabled_; }

 private:
  struct Node {
    std::string_view op;
    Tensor value;
    Tensor grad;
    std::vector<NodeId> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    std::ptrdiff_t param = -1;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  std::unordered_map<ParamId, NodeId> param_nodes_;
  bool grad_enabled_ = true;
  bool backward_done_ = false;
};

inline const Tensor& Var::value() const { return graph->value(id); }
inline const Tensor& Var::grad() const { return graph->grad(id); }

}  // namespace avsr
