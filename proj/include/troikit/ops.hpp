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

#ifndef TROIKIT_OPS_HPP_
#define TROIKIT_OPS_HPP_

#include <cstddef>
#include <vector>

#include "troikit/tensor.hpp"

// Differentiable tensor operations. Shapes must match exactly; the only
// broadcast is a bias vector added across the rows of a matrix. Spatial ops
// use channels-last layout [batch, W, H, C].
namespace troikit {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
// x: [..., C], bias: [C].
Tensor add_bias(const Tensor& x, const Tensor& bias);

// Subgradient at exactly 0 is 0.
Tensor relu(const Tensor& x);

// Row-wise softmax of a matrix, computed with the row maximum subtracted.
Tensor softmax_rows(const Tensor& x);

// Per-row normalization to zero mean and unit (biased) variance, then
// x̂·gamma + beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

// x: [n, in], weight: [in, out], bias: [out] -> [n, out].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct Conv2dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

// x: [B, W, H, Cin], weight: [k, k, Cin, Cout], bias: [Cout] -> [B, Wo, Ho, Cout].
// Zero padding; Wo = (W + 2p - k) / stride + 1.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Conv2dOptions opt = {});

struct PoolWindow {
  std::size_t width;
  std::size_t height;
  std::size_t stride_w;
  std::size_t stride_h;
};

// x: [B, W, H, C]; no padding. Max ties resolve to the first cell in
// row-major window order.
Tensor mean_pool(const Tensor& x, PoolWindow window);
Tensor max_pool(const Tensor& x, PoolWindow window);

Tensor reshape(const Tensor& x, Shape shape);

// Matrix slicing and concatenation.
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);

Tensor sum(const Tensor& x);
// x: [n, C] -> [C].
Tensor mean_rows(const Tensor& x);

}  // namespace troikit

#endif  // TROIKIT_OPS_HPP_
