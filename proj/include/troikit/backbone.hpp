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

#ifndef TROIKIT_BACKBONE_HPP_
#define TROIKIT_BACKBONE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "troikit/roi.hpp"
#include "troikit/tensor.hpp"
#include "troikit/troi.hpp"

namespace troikit {

inline constexpr std::size_t kStages = 4;

// Four frame-local conv stages (3x3, zero padding 1, ReLU), then global
// average pooling over T x W x H and a linear classifier.
struct BackboneSpec {
  std::size_t frames = 8;
  std::size_t width = 32;
  std::size_t height = 32;
  std::size_t in_channels = 3;
  std::array<std::size_t, kStages> channels{16, 32, 64, 64};
  std::array<std::size_t, kStages> strides{2, 2, 2, 2};
  std::size_t classes = 6;

  // Spatial size after each stage; throws ConfigError unless strictly decreasing.
  std::array<std::pair<std::size_t, std::size_t>, kStages> stage_sizes() const;
  void validate() const;
};

inline constexpr std::size_t kKernel = 3;

// conv3/conv4/conv5 map onto the outputs of stages 2/3/4 (indices 1/2/3).
std::size_t stage_index(InsertionPoint p);

struct ModelConfig {
  BackboneSpec backbone;
  bool troi_enabled = true;
  TroiConfig troi;

  // Stable key=value text; its digest identifies checkpoints.
  std::string canonical() const;
  static ModelConfig parse_canonical(const std::string& text);
};

class Model {
 public:
  static Model create(const ModelConfig& config, std::uint64_t seed);

  // video: [T, W, H, 3] -> logits [K]. Thread-safe; parameters are only read.
  Tensor forward(const Tensor& video, const std::vector<RoiBox>& rois, TroiTrace* trace = nullptr) const;

  // Stage weights and biases, then TROI parameters (if enabled), then the head.
  std::vector<Tensor> parameters() const;
  const ModelConfig& config() const { return config_; }

  std::array<Tensor, kStages> conv_weight;
  std::array<Tensor, kStages> conv_bias;
  TroiParams troi;
  Tensor head_weight;  // [C_last, K]
  Tensor head_bias;    // [K]

 private:
  ModelConfig config_;
};

// -log softmax(logits)[label].
Tensor cross_entropy(const Tensor& logits, std::size_t label);

struct CheckpointState {
  std::uint32_t epoch = 0;          // epochs completed
  std::vector<Tensor> velocity;     // optimizer state, empty when absent
};

// Layout: "TROIKIT1", u32 version, u64 FNV-1a digest of the canonical config,
// u32 length + config text, u32 epoch, u32 count + parameter tensors, u32
// count + velocity tensors. Integers little-endian; tensors in the binary
// tensor record format.
void save_checkpoint(const std::string& path, const Model& model, const CheckpointState& state = {});
Model load_checkpoint(const std::string& path, CheckpointState* state = nullptr);

}  // namespace troikit

#endif  // TROIKIT_BACKBONE_HPP_
