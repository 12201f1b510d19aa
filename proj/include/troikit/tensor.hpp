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

#ifndef TROIKIT_TENSOR_HPP_
#define TROIKIT_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace troikit {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Storage precision. Values are always held in doubles; in kFloat32 mode every
// op output and parameter update is rounded to the nearest float, so results
// match what float storage would produce at each step.
enum class Precision { kFloat32, kFloat64 };

void set_precision(Precision p);
Precision precision();

// Rounds to float when the current precision is kFloat32.
double round_storage(double v);
void round_storage(std::span<double> values);

class PrecisionScope {
 public:
  explicit PrecisionScope(Precision p) : saved_(precision()) { set_precision(p); }
  ~PrecisionScope() { set_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  Precision saved_;
};

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// Reads the node's own value and gradient and accumulates into its inputs.
using BackwardFn = std::function<void(const Node& self)>;

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  bool leaf = true;
  // Set on leaves once backward has written their gradient; cleared by
  // zero_grad. A second backward into a pending leaf is a contract error.
  bool grad_pending = false;
  std::vector<NodePtr> inputs;
  BackwardFn backward;
};

// Adds `g` into the gradient buffer of `node`, allocating it on first use.
void accumulate(Node& node, std::span<const double> g);

}  // namespace detail

// Dense row-major array of reals with optional reverse-mode gradient tracking.
// Tensors share their node: copies alias the same storage and graph position.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Only leaves may be written in place (parameter updates, test setup).
  std::span<double> mutable_data();

  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  bool is_leaf() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  void zero_grad();

  // Copy of the values, cut from the graph.
  Tensor detach() const;

  // Reverse-mode sweep from this scalar. Every reachable gradient-tracked
  // leaf receives dThis/dLeaf. Calling again before zero_grad on those leaves
  // throws ContractError.
  void backward() const;

  const detail::NodePtr& node() const { return node_; }

  // Builds an op result. `backward` is only retained when an input tracks
  // gradients; values are rounded to the current storage precision.
  static Tensor make_op(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                        detail::BackwardFn backward);

 private:
  explicit Tensor(detail::NodePtr node) : node_(std::move(node)) {}
  detail::NodePtr node_;
};

}  // namespace troikit

#endif  // TROIKIT_TENSOR_HPP_
