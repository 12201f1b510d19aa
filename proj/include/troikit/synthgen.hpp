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

#ifndef TROIKIT_SYNTHGEN_HPP_
#define TROIKIT_SYNTHGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "troikit/roi.hpp"
#include "troikit/tensor.hpp"

namespace troikit {

// Relational action classes. Frame 0 of every video is a setup frame drawn
// from the seed alone; the action plays out over frames 1..T-1. Cover and
// uncover, and put-beside and move-away, replay the same frames in opposite
// order, so without temporal order they are indistinguishable.
enum class ActionClass : std::size_t {
  kPutBeside = 0,
  kCover = 1,
  kUncover = 2,
  kSwap = 3,
  kMoveAway = 4,
  kSplit = 5,
};

inline constexpr std::size_t kNumActionClasses = 6;

const char* class_name(ActionClass c);
ActionClass parse_class(const std::string& name);

struct SynthVideo {
  Tensor frames;  // [T, W, H, 3], values exactly representable as float
  std::vector<RoiBox> rois;
  std::size_t label = 0;
  std::uint64_t seed = 0;
};

// Deterministic in (seed, class, frames, size). Requires frames >= 4 and
// size >= 16. Boxes bound the visible pixels of each entity; fully hidden
// entities emit no box.
SynthVideo generate(std::uint64_t seed, ActionClass action, std::size_t frames = 8, std::size_t size = 32);

// Box perturbations used to probe detection quality.
struct Corruption {
  enum class Kind { kNone, kShift, kDropHands, kDropObjects, kDropAll };
  Kind kind = Kind::kNone;
  double target_iou = 1.0;  // kShift only

  static Corruption shift(double iou);
  static Corruption parse(const std::string& mode);  // iou@0.50|iou@0.25|iou@0.05|drop-*
  std::string name() const;
};

// Horizontal shift, as a fraction of box width, that leaves IoU = alpha with
// the original box: (1 - d) / (1 + d) = alpha.
double shift_for_iou(double alpha);

// Shifted boxes move toward the horizontal image center and are then clipped;
// boxes clipped to nothing are removed.
std::vector<RoiBox> corrupt_rois(const std::vector<RoiBox>& rois, const Corruption& mode);

struct DatasetSpec {
  std::size_t classes = kNumActionClasses;
  std::size_t per_class = 100;
  std::uint64_t seed = 7;
  std::size_t frames = 8;
  std::size_t size = 32;
};

// Video i has label i % classes and seed mix_seed(spec.seed, i).
std::vector<SynthVideo> build_dataset(const DatasetSpec& spec);

// Directory layout: manifest.txt with one tab-separated record per video
// (path, label, T, boxes as frame,x1,y1,x2,y2,entity joined by ';' or '-'
// when empty) and videos/NNNNNN.tensor in the binary tensor format.
// Refuses to replace an existing manifest unless `force`.
void save_dataset(const std::string& dir, const std::vector<SynthVideo>& videos, bool force);
std::vector<SynthVideo> load_dataset(const std::string& dir);

}  // namespace troikit

#endif  // TROIKIT_SYNTHGEN_HPP_
