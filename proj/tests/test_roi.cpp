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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "test_util.hpp"
#include "troikit/error.hpp"
#include "troikit/gradcheck.hpp"
#include "troikit/ops.hpp"
#include "troikit/roi.hpp"

namespace troikit {
namespace {

using testing::random_box;
using testing::random_tensor;
using testing::brute_align;
using testing::values;

class Roi : public ::testing::Test {
 protected:
  PrecisionScope scope_{Precision::kFloat64};
};

Tensor ramp_4x4() {
  std::vector<double> v(16);
  for (int i = 0; i < 16; ++i) v[i] = i;
  return Tensor::from({4, 4, 1}, v);
}

TEST_F(Roi, FullBoxOnRampIsMean) {
  const RoiBox full{0, 0, 0, 1, 1, Entity::kObject};
  EXPECT_NEAR(roi_align(ramp_4x4(), full, 1).item(), 7.5, 1e-12);
  EXPECT_NEAR(brute_align(ramp_4x4(), full, 1)[0], 7.5, 1e-12);
}

TEST_F(Roi, BoxAtCellCenterReadsThatCell) {
  // A tiny box centred on cell (2, 1) of a 4x4 map.
  const double cx = 2.5 / 4, cy = 1.5 / 4, e = 1e-9;
  const RoiBox b{0, cx - e, cy - e, cx + e, cy + e, Entity::kObject};
  EXPECT_NEAR(roi_align(ramp_4x4(), b, 1).item(), 2 * 4 + 1, 1e-6);
}

TEST_F(Roi, ConstantMapGivesConstant) {
  Rng rng(21);
  const Tensor m = Tensor::full({5, 6, 3}, -2.25);
  for (int i = 0; i < 20; ++i) {
    for (double v : values(roi_align(m, random_box(rng, 1), 2))) EXPECT_NEAR(v, -2.25, 1e-12);
  }
}

TEST_F(Roi, MatchesBruteForceOracle) {
  Rng rng(22);
  for (int i = 0; i < 50; ++i) {
    const Tensor m = random_tensor({7, 5, 3}, rng);
    const RoiBox b = random_box(rng, 1, 0.01);
    const std::size_t out = static_cast<std::size_t>(rng.integer(1, 3));
    const auto got = values(roi_align(m, b, out));
    const auto want = brute_align(m, b, out);
    for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-9);
  }
}

TEST_F(Roi, DegenerateBoxIsInvalid) {
  const RoiBox flat{0, 0.3, 0.2, 0.3, 0.6, Entity::kHand};
  EXPECT_THROW(roi_align(ramp_4x4(), flat, 2), InvalidBoxError);
  const RoiBox outside{0, 1.2, 0.2, 1.5, 0.6, Entity::kHand};
  EXPECT_THROW(roi_align(ramp_4x4(), outside, 2), InvalidBoxError);
}

TEST_F(Roi, Gradient) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    GradcheckOptions o;
    o.seed = seed;
    EXPECT_TRUE(gradcheck_op("roi_align", o).passed);
  }
}

TEST_F(Roi, ClipAndSanitize) {
  const auto c = clip_box({0, -0.2, 0.1, 0.5, 1.4, Entity::kObject});
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->x1, 0.0);
  EXPECT_EQ(c->y2, 1.0);
  EXPECT_FALSE(clip_box({0, 1.1, 0.1, 1.5, 0.4, Entity::kObject}).has_value());

  const auto s = sanitize_rois({{0, 0.1, 0.1, 0.4, 0.4, Entity::kHand}, {1, 2.0, 0, 3.0, 1, Entity::kHand}}, 2);
  EXPECT_EQ(s.boxes.size(), 1u);
  EXPECT_EQ(s.dropped, 1u);
  EXPECT_THROW(sanitize_rois({{2, 0.1, 0.1, 0.4, 0.4, Entity::kHand}}, 2), InvalidBoxError);
}

TEST_F(Roi, ExtractEmpty) {
  const RoiFeatureSet s = extract_features(Tensor::zeros({2, 3, 3, 4}), {});
  EXPECT_EQ(s.size(), 0u);
  EXPECT_EQ(s.features.dim(0), 0u);
}

TEST_F(Roi, ExtractConstantMap) {
  const RoiFeatureSet s = extract_features(Tensor::full({2, 4, 4, 3}, 0.75), {{1, 0.1, 0.2, 0.6, 0.9, Entity::kHand}});
  for (double v : values(s.features)) EXPECT_NEAR(v, 0.75, 1e-15);
}

TEST_F(Roi, ExtractRowsMatchSingleCalls) {
  Rng rng(23);
  const Tensor x = random_tensor({3, 5, 4, 6}, rng);
  const std::vector<RoiBox> rois = {random_box(rng, 3), random_box(rng, 3), random_box(rng, 3)};
  const RoiFeatureSet all = extract_features(x, rois);
  for (std::size_t i = 0; i < rois.size(); ++i) {
    const RoiFeatureSet one = extract_features(x, {rois[i]});
    for (std::size_t ch = 0; ch < 6; ++ch) EXPECT_EQ(all.features.at({i, ch}), one.features.at({0, ch}));
    // Independent route: align on the frame slice with a 2x2 grid, then average the bins.
    const std::size_t per = 5 * 4 * 6;
    const Tensor frame = Tensor::from({5, 4, 6}, std::vector<double>(x.data().begin() + rois[i].frame * per,
                                                                     x.data().begin() + (rois[i].frame + 1) * per));
    const auto bins = brute_align(frame, rois[i], kPoolGrid);
    for (std::size_t ch = 0; ch < 6; ++ch) {
      double mean = 0.0;
      for (std::size_t b = 0; b < 4; ++b) mean += bins[b * 6 + ch] / 4.0;
      EXPECT_NEAR(all.features.at({i, ch}), mean, 1e-12);
    }
  }
}

TEST_F(Roi, FootprintFullBox) {
  const RoiFootprint fp = box_to_footprint({0, 0, 0, 1, 1, Entity::kObject}, 4, 4);
  EXPECT_EQ(fp, (RoiFootprint{0, 0, 3, 0, 3}));
}

TEST_F(Roi, FootprintTinyBoxIsOneCell) {
  const RoiFootprint fp = box_to_footprint({0, 0.49, 0.49, 0.51, 0.51, Entity::kObject}, 14, 14);
  EXPECT_EQ(fp.cell_count(), 1u);
  // Scaled span [6.86, 7.14] holds no centre; the centre 7.0 falls in cell 7.
  EXPECT_EQ(fp.x_first, 7u);
  EXPECT_EQ(fp.y_first, 7u);
}

// Cells whose centres lie inside the scaled box, with the centre-cell fallback.
RoiFootprint center_oracle(const RoiBox& b, std::size_t w, std::size_t h) {
  auto axis = [](double lo, double hi, std::size_t n, std::size_t& first, std::size_t& last) {
    std::vector<std::size_t> in;
    for (std::size_t i = 0; i < n; ++i) {
      const double centre = static_cast<double>(i) + 0.5;
      if (centre >= lo * static_cast<double>(n) && centre <= hi * static_cast<double>(n)) in.push_back(i);
    }
    if (in.empty()) {
      const double mid = 0.5 * (lo + hi) * static_cast<double>(n);
      first = last = std::min(n - 1, static_cast<std::size_t>(std::floor(mid)));
    } else {
      first = in.front();
      last = in.back();
    }
  };
  RoiFootprint fp;
  fp.frame = b.frame;
  axis(b.x1, b.x2, w, fp.x_first, fp.x_last);
  axis(b.y1, b.y2, h, fp.y_first, fp.y_last);
  return fp;
}

TEST_F(Roi, FootprintQuarterBox) {
  const RoiBox b{0, 0, 0, 0.5, 0.5, Entity::kObject};
  EXPECT_EQ(box_to_footprint(b, 4, 4), (RoiFootprint{0, 0, 1, 0, 1}));
  EXPECT_EQ(center_oracle(b, 4, 4), (RoiFootprint{0, 0, 1, 0, 1}));
}

TEST_F(Roi, FootprintMatchesCenterOracle) {
  Rng rng(24);
  for (int i = 0; i < 500; ++i) {
    const RoiBox b = random_box(rng, 1, 0.01);
    const auto w = static_cast<std::size_t>(rng.integer(1, 9)), h = static_cast<std::size_t>(rng.integer(1, 9));
    EXPECT_EQ(box_to_footprint(b, w, h), center_oracle(b, w, h));
  }
}

TEST_F(Roi, WriteBackEmptyIsIdentity) {
  Rng rng(25);
  const Tensor x = random_tensor({2, 3, 3, 4}, rng);
  EXPECT_EQ(values(write_back(x, Tensor::zeros({0, 4}), {})), values(x));
}

TEST_F(Roi, WriteBackFixedPointOnConstantMap) {
  const Tensor x = Tensor::full({1, 4, 4, 2}, 1.25);
  const RoiFeatureSet s = extract_features(x, {{0, 0.1, 0.3, 0.7, 0.8, Entity::kObject}});
  const auto y = values(write_back(x, s.features, s.footprints));
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], 1.25, 1e-6);
}

TEST_F(Roi, WriteBackOverlapIsMean) {
  const Tensor x = Tensor::zeros({1, 4, 4, 2});
  const Tensor f = Tensor::from({2, 2}, {1, 2, 3, 6});
  const std::vector<RoiFootprint> fps = {{0, 0, 1, 0, 1}, {0, 1, 2, 1, 2}};
  const Tensor y = write_back(x, f, fps);
  EXPECT_EQ(y.at({0, 1, 1, 0}), 2.0);  // (1 + 3) / 2
  EXPECT_EQ(y.at({0, 1, 1, 1}), 4.0);  // (2 + 6) / 2
  EXPECT_EQ(y.at({0, 0, 0, 0}), 1.0);
  EXPECT_EQ(y.at({0, 2, 2, 1}), 6.0);
  EXPECT_EQ(y.at({0, 3, 3, 0}), 0.0);
}

TEST_F(Roi, WriteBackLocalityAndPermutation) {
  Rng rng(26);
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor x = random_tensor({3, 4, 4, 3}, rng);
    std::vector<RoiBox> rois;
    for (int i = 0; i < 5; ++i) rois.push_back(random_box(rng, 3));
    const RoiFeatureSet s = extract_features(x, rois);
    const Tensor f = random_tensor({rois.size(), 3}, rng);
    const auto y = values(write_back(x, f, s.footprints));

    std::vector<bool> covered(3 * 4 * 4, false);
    for (const auto& fp : s.footprints)
      for (std::size_t a = fp.x_first; a <= fp.x_last; ++a)
        for (std::size_t b = fp.y_first; b <= fp.y_last; ++b) covered[(fp.frame * 4 + a) * 4 + b] = true;
    for (std::size_t cell = 0; cell < covered.size(); ++cell) {
      if (covered[cell]) continue;
      for (std::size_t ch = 0; ch < 3; ++ch) EXPECT_EQ(y[cell * 3 + ch], x.data()[cell * 3 + ch]);
    }

    // Reverse the ROI order: identical bits.
    std::vector<double> rev_rows;
    std::vector<RoiFootprint> rev_fps(s.footprints.rbegin(), s.footprints.rend());
    for (std::size_t i = rois.size(); i-- > 0;)
      for (std::size_t ch = 0; ch < 3; ++ch) rev_rows.push_back(f.at({i, ch}));
    EXPECT_EQ(values(write_back(x, Tensor::from({rois.size(), 3}, rev_rows), rev_fps)), y);
  }
}

TEST_F(Roi, WriteBackCountMismatch) {
  EXPECT_THROW(write_back(Tensor::zeros({1, 2, 2, 1}), Tensor::zeros({2, 1}), {{0, 0, 0, 0, 0}}), ContractError);
}

TEST_F(Roi, WriteBackGradientToFeaturesSplitsOverlap) {
  Tensor x = Tensor::zeros({1, 2, 2, 1}, true);
  Tensor f = Tensor::from({2, 1}, {1, 2}, true);
  sum(write_back(x, f, {{0, 0, 1, 0, 0}, {0, 1, 1, 0, 1}})).backward();
  // Row 0 owns (0,0) and shares (1,0); row 1 owns (1,1) and shares (1,0).
  EXPECT_DOUBLE_EQ(f.grad()[0], 1.5);
  EXPECT_DOUBLE_EQ(f.grad()[1], 1.5);
  EXPECT_EQ(x.grad()[0], 0.0);
  EXPECT_EQ(x.grad()[1], 1.0);  // cell (0,1) untouched
  EXPECT_EQ(x.grad()[2], 0.0);
}

TEST_F(Roi, IouOracle) {
  const RoiBox a{0, 0, 0, 0.5, 0.5, Entity::kObject};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, {0, 0.25, 0, 0.75, 0.5, Entity::kObject}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(iou(a, {0, 0.6, 0.6, 0.9, 0.9, Entity::kObject}), 0.0);
}

}  // namespace
}  // namespace troikit
