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

#include "spikenas/tensor/autograd.hpp"

#include <unordered_set>

#include "spikenas/error.hpp"

namespace spikenas {

Tensor& Node::ensure_grad() {
  if (grad.shape() != value.shape() || grad.size() != value.size()) {
    grad = Tensor(value.shape(), 0.0f);
    touched.assign(value.size(), 0);
  }
  return grad;
}

void Node::accumulate(Tensor g) {
  if (g.shape() != value.shape()) {
    throw ShapeError("gradient shape " + to_string(g.shape()) + " does not match value " +
                     to_string(value.shape()));
  }
  if (grad.empty() && g.size() == value.size()) {
    grad = std::move(g);
    touched.assign(value.size(), 1);
    return;
  }
  Tensor& dst = ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  std::fill(touched.begin(), touched.end(), std::uint8_t{1});
}

void Node::accumulate_leading(const Tensor& g) {
  const Shape& full = value.shape();
  const Shape& part = g.shape();
  if (part.size() != full.size()) throw ShapeError("leading accumulate rank mismatch");
  Tensor& dst = ensure_grad();
  if (g.size() == 0) return;
  const std::size_t r = full.size();
  if (r == 0) {
    dst[0] += g[0];
    touched[0] = 1;
    return;
  }
  const std::size_t inner = part[r - 1];
  const std::size_t rows = g.size() / inner;
  std::vector<std::size_t> idx(r, 0);
  for (std::size_t row = 0; row < rows; ++row) {
    std::size_t off = 0;
    for (std::size_t a = 0; a + 1 < r; ++a) off = off * full[a] + idx[a];
    off *= full[r - 1];
    for (std::size_t j = 0; j < inner; ++j) {
      dst[off + j] += g[row * inner + j];
      touched[off + j] = 1;
    }
    for (std::size_t a = r - 1; a-- > 0;) {
      if (++idx[a] < part[a]) break;
      idx[a] = 0;
    }
  }
}

Variable::Variable(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Variable Variable::make(Tensor value, std::vector<Variable> parents,
                        std::function<void(Node&)> backward_fn) {
  Variable out(std::move(value), false);
  for (const auto& p : parents) {
    if (p.requires_grad()) out.node_->requires_grad = true;
  }
  if (out.node_->requires_grad) {
    out.node_->parents.reserve(parents.size());
    for (auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward_fn = std::move(backward_fn);
  }
  return out;
}

void Variable::backward() const {
  if (!node_) throw ValueError("backward on undefined variable");
  if (node_->value.size() != 1) {
    throw ShapeError("backward requires a scalar loss, got shape " + to_string(node_->value.shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->ensure_grad();
  node_->grad[0] += 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
  // Free the graph: interior nodes drop their closures, edges and gradients.
  for (Node* n : order) {
    if (n->backward_fn) {
      n->backward_fn = nullptr;
      n->parents.clear();
      n->grad = Tensor();
      n->touched.clear();
      n->requires_grad = false;
    }
  }
}

void Variable::zero_grad() const {
  if (!node_) return;
  node_->grad = Tensor();
  node_->touched.clear();
}

}  // namespace spikenas
