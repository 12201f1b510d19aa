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

#ifndef TROIKIT_POSENC_HPP_
#define TROIKIT_POSENC_HPP_

#include <cstddef>
#include <vector>

#include "troikit/roi.hpp"
#include "troikit/tensor.hpp"

namespace troikit {

enum class RoiOrder { kLeftToRight, kRightToLeft };

// positions[i] is the sequence index of rois[i]. Frames ascend; within a frame
// boxes go by x1 (ascending for left-to-right, descending otherwise), then y1
// ascending, then input order.
std::vector<std::size_t> order_rois(const std::vector<RoiBox>& rois, RoiOrder order = RoiOrder::kLeftToRight);

// Sinusoidal code of length `channels` (even): sin on even dims, cos on odd.
std::vector<double> sinusoidal_encoding(std::size_t pos, std::size_t channels);

// Rows of sinusoidal codes for the given positions, as a constant [N, C] tensor.
Tensor sinusoidal_table(const std::vector<std::size_t>& positions, std::size_t channels);

// Width of one coordinate slot, C/4; throws ConfigError unless 4 divides C.
std::size_t coord_slot_width(std::size_t channels);

// Learned coordinate code: each of (x1, y1, x2, y2) scales its own C/4-wide
// row of `projection` ([4, C/4]); the four pieces are concatenated.
Tensor coord_encoding(const std::vector<RoiBox>& boxes, const Tensor& projection);
Tensor coord_encoding(const RoiBox& box, const Tensor& projection);

}  // namespace troikit

#endif  // TROIKIT_POSENC_HPP_
