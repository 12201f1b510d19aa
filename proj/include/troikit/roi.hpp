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

#ifndef TROIKIT_ROI_HPP_
#define TROIKIT_ROI_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "troikit/tensor.hpp"

namespace troikit {

enum class Entity { kHand, kObject, kScene };

const char* entity_name(Entity e);
Entity parse_entity(const std::string& name);

// One region of interest: a frame index plus box corners normalized to the
// input image, x along the feature-map width axis and y along the height axis.
struct RoiBox {
  std::size_t frame = 0;
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
  Entity entity = Entity::kObject;

  friend bool operator==(const RoiBox&, const RoiBox&) = default;
};

// Cells of one frame covered by a box, as inclusive column/row spans.
struct RoiFootprint {
  std::size_t frame = 0;
  std::size_t x_first = 0;
  std::size_t x_last = 0;
  std::size_t y_first = 0;
  std::size_t y_last = 0;

  std::size_t cell_count() const { return (x_last - x_first + 1) * (y_last - y_first + 1); }
  friend bool operator==(const RoiFootprint&, const RoiFootprint&) = default;
};

// Clips the corners to [0,1]; nullopt when nothing of positive area remains.
std::optional<RoiBox> clip_box(const RoiBox& box);

struct SanitizedRois {
  std::vector<RoiBox> boxes;
  std::size_t dropped = 0;
};

// Clips every box and drops the ones left with zero area, counting them.
// A frame index outside [0, frames) is an InvalidBoxError.
SanitizedRois sanitize_rois(const std::vector<RoiBox>& rois, std::size_t frames);

// Bilinear RoIAlign on one frame. x_t: [W, H, C] -> [out, out, C]. Each bin
// averages 2x2 sample points; cell centers sit at half-integer coordinates.
Tensor roi_align(const Tensor& x_t, const RoiBox& box, std::size_t out);

// Bin grid used before the spatial mean in extract_features.
inline constexpr std::size_t kPoolGrid = 2;

struct RoiFeatureSet {
  Tensor features;  // [N, C]
  std::vector<RoiBox> boxes;
  std::vector<RoiFootprint> footprints;
  std::vector<std::size_t> positions;  // filled by the caller that orders the set
  std::size_t size() const { return boxes.size(); }
};

// f_i = spatial mean of roi_align(X[frame_i], box_i, kPoolGrid) for every box.
// X: [T, W, H, C]. Boxes must already be valid (see sanitize_rois).
RoiFeatureSet extract_features(const Tensor& x, const std::vector<RoiBox>& rois);

// Returns X with every footprint overwritten by its row of `features`; cells
// shared by several footprints take the mean of the contributing rows. Cells
// outside all footprints are copied bit-exactly.
Tensor write_back(const Tensor& x, const Tensor& features, const std::vector<RoiFootprint>& footprints);

// Cells whose centers fall inside the box scaled to a W x H map; an axis with
// no such center falls back to the cell containing the box center.
RoiFootprint box_to_footprint(const RoiBox& box, std::size_t width, std::size_t height);

double iou(const RoiBox& a, const RoiBox& b);

}  // namespace troikit

#endif  // TROIKIT_ROI_HPP_
