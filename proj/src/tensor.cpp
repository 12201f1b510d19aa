/* Copyright 2026 The troikit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "troikit/tensor.hpp"

#include <atomic>
#include <sstream>
#include <unordered_set>

#include "troikit/error.hpp"

namespace troikit {

namespace {
std::atomic<Precision> g_precision{Precision::kFloat32};
}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void set_precision(Precision p) { g_precision.store(p); }
Precision precision() { return g_precision.load(); }

double round_storage(double v) {
  if (precision() == Precision::kFloat32) return static_cast<double>(static_cast<float>(v));
  return v;
}

void round_storage(std::span<double> values) {
  if (precision() != Precision::kFloat32) return;
  for (double& v : values) v = static_cast<double>(static_cast<float>(v));
}

namespace detail {

void accumulate(Node& node, std::span<const double> g) {
  if (node.grad.empty()) {
    node.grad.assign(g.begin(), g.end());
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) node.grad[i] += g[i];
}

}  // namespace detail

using detail::Node;
using detail::NodePtr;

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> data(troikit::numel(shape), value);
  return from(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  if (troikit::numel(shape) != data.size()) {
    throw DimensionError("tensor data of length " + std::to_string(data.size()) +
                         " does not fill shape " + shape_str(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  round_storage(node->value);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value) { return from({}, {value}); }

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape()));
  }
  return node_->shape[axis];
}

std::size_t Tensor::numel() const { return node_->value.size(); }

std::span<const double> Tensor::data() const { return node_->value; }

std::span<double> Tensor::mutable_data() {
  if (!node_->leaf) throw ContractError("only leaf tensors may be modified in place");
  return node_->value;
}

double Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  if (index.size() != rank()) {
    throw DimensionError("index rank " + std::to_string(index.size()) + " for tensor " +
                         shape_str(shape()));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= node_->shape[axis]) throw DimensionError("index out of range for " + shape_str(shape()));
    flat = flat * node_->shape[axis] + i;
    ++axis;
  }
  return node_->value[flat];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
bool Tensor::is_leaf() const { return node_->leaf; }
bool Tensor::has_grad() const { return !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (node_->grad.empty()) throw ContractError("tensor " + shape_str(shape()) + " holds no gradient");
  return node_->grad;
}

void Tensor::zero_grad() {
  node_->grad.clear();
  node_->grad_pending = false;
}

Tensor Tensor::detach() const { return from(shape(), node_->value); }

Tensor Tensor::make_op(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                       detail::BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  round_storage(node->value);
  node->leaf = false;
  bool tracked = false;
  for (const Tensor& t : inputs) tracked = tracked || t.requires_grad();
  if (tracked) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (const Tensor& t : inputs) node->inputs.push_back(t.node_);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

void Tensor::backward() const {
  if (!node_) throw ContractError("backward on an undefined tensor");
  if (numel() != 1) throw ContractError("backward requires a scalar loss, got " + shape_str(shape()));
  if (!node_->requires_grad) throw ContractError("loss is not reachable from any gradient-tracked leaf");

  // Iterative post-order DFS gives a topological order (inputs before users).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      Node* child = n->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (n->leaf && n->grad_pending) {
      throw ContractError("backward called twice without zero_grad on leaf " + shape_str(n->shape));
    }
  }
  for (Node* n : order) {
    if (!n->leaf) n->grad.clear();
  }

  node_->grad.assign(1, 1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->leaf) continue;
    if (n->grad.empty()) continue;  // no path from the loss reached this node
    n->backward(*n);
    n->grad.clear();
    n->grad.shrink_to_fit();
  }
  for (Node* n : order) {
    if (!n->leaf) continue;
    if (n->grad.empty()) n->grad.assign(n->value.size(), 0.0);
    n->grad_pending = true;
  }
}

}  // namespace troikit
