// Copyright 2026 The spikenas Authors.
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
#include <functional>
#include <memory>
#include <vector>

#include "spikenas/tensor/tensor.hpp"

namespace spikenas {

/// A node of the reverse-mode graph. Leaves hold parameters or inputs;
/// interior nodes carry a closure that pushes `grad` into their parents.
struct Node {
  Tensor value;
  Tensor grad;  // empty until something flows in
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  /// Elements that received gradient since the last zero_grad(). Empty means
  /// nothing touched; sized like `value` once any gradient arrives. Lets the
  /// optimizer restrict updates to the slices a subnet actually used.
  std::vector<std::uint8_t> touched;

  bool is_leaf() const noexcept { return !backward_fn; }

  /// grad += g over the whole tensor.
  void accumulate(Tensor g);
  /// grad[leading slice of g.shape()] += g.
  void accumulate_leading(const Tensor& g);
  /// Allocates a zero grad (and touched mask) if missing.
  Tensor& ensure_grad();
};

/// Shared handle to a graph node.
class Variable {
 public:
  Variable() = default;
  explicit Variable(Tensor value, bool requires_grad = false);

  static Variable make(Tensor value, std::vector<Variable> parents,
                       std::function<void(Node&)> backward_fn);

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& node_ptr() const noexcept { return node_; }

  /// Reverse pass from a scalar. Frees interior graph edges afterwards.
  void backward() const;
  void zero_grad() const;

  friend bool same_node(const Variable& a, const Variable& b) { return a.node_ == b.node_; }

 private:
  std::shared_ptr<Node> node_;
};

}  // namespace spikenas
