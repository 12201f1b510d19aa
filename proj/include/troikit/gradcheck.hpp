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

#ifndef TROIKIT_GRADCHECK_HPP_
#define TROIKIT_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "troikit/tensor.hpp"

namespace troikit {

struct GradcheckOptions {
  std::uint64_t seed = 1;
  std::size_t points = 10;
  double step = 1e-5;
  double tolerance = 1e-4;
  // Test hook: analytic gradients are scaled by (1 + perturb) before comparison.
  double perturb = 0.0;
};

struct GradcheckResult {
  std::string op;
  std::size_t points = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

// |a - n| / max(|a|, |n|, 1e-6). The floor keeps vanishing gradients from
// turning rounding noise into a failure.
double relative_error(double analytic, double numeric);

// Central differences on `points` coordinates drawn across `inputs`. `loss`
// must rebuild the graph from the current input values on every call.
GradcheckResult check_gradients(const std::string& name, const std::vector<Tensor>& inputs,
                                const std::function<Tensor()>& loss, const GradcheckOptions& options);

// matmul, softmax, layer_norm, relu, linear, conv2d, roi_align,
// encoder_layer, troi_forward, backbone_loss.
const std::vector<std::string>& gradcheck_ops();

// Runs in 64-bit mode. Unknown names are a ConfigError.
GradcheckResult gradcheck_op(const std::string& op, const GradcheckOptions& options = {});
std::vector<GradcheckResult> gradcheck_all(const GradcheckOptions& options = {});

}  // namespace troikit

#endif  // TROIKIT_GRADCHECK_HPP_
