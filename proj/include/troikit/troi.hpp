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

#ifndef TROIKIT_TROI_HPP_
#define TROIKIT_TROI_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "troikit/attention.hpp"
#include "troikit/posenc.hpp"
#include "troikit/roi.hpp"
#include "troikit/rng.hpp"
#include "troikit/tensor.hpp"

namespace troikit {

// Backbone stage whose output the module rewrites.
enum class InsertionPoint { kConv3, kConv4, kConv5 };

const char* insertion_name(InsertionPoint p);
InsertionPoint parse_insertion(const std::string& name);

struct TroiConfig {
  InsertionPoint at = InsertionPoint::kConv4;
  std::size_t layers = 1;
  std::size_t heads = 2;
  bool scene_token = false;
  bool coord_encoding = false;
  RoiOrder order = RoiOrder::kLeftToRight;
};

struct TroiParams {
  std::size_t channels = 0;
  std::vector<EncoderLayerParams> layers;
  Tensor coord_projection;  // [4, C/4], defined only with coord_encoding

  std::vector<Tensor> parameters() const;
};

TroiParams init_troi(const TroiConfig& config, std::size_t channels, Rng& rng);

// Optional diagnostics from one forward pass.
struct TroiTrace {
  bool bypassed = false;
  std::size_t rois = 0;
  std::size_t dropped = 0;
  std::vector<Tensor> attention;  // every head of every layer
  std::vector<RoiFootprint> footprints;
};

// One max-pooled C-vector per frame of X: [T, C].
Tensor scene_tokens(const Tensor& x);

// Appends scene_tokens(x) below the rows of f when the variant is enabled;
// returns f untouched otherwise.
Tensor add_scene_token(const Tensor& f, const Tensor& x, const TroiConfig& config);

// X' = g(X, R): ROI features are pooled, position-coded, passed through the
// encoder layers and written back over their footprints. With no usable ROI
// the input tensor itself is returned.
Tensor troi_forward(const Tensor& x, const std::vector<RoiBox>& rois, const TroiParams& params,
                    const TroiConfig& config, TroiTrace* trace = nullptr);

}  // namespace troikit

#endif  // TROIKIT_TROI_HPP_
