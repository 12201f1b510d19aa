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

#include <cmath>
#include <fstream>

#include "test_util.hpp"
#include "troikit/backbone.hpp"
#include "troikit/error.hpp"
#include "troikit/gradcheck.hpp"

namespace troikit {
namespace {

using testing::random_box;
using testing::random_tensor;
using testing::values;

class Backbone : public ::testing::Test {
 protected:
  PrecisionScope scope_{Precision::kFloat64};
};

ModelConfig small_config(bool troi = true) {
  ModelConfig c;
  c.backbone.frames = 2;
  c.backbone.width = 16;
  c.backbone.height = 16;
  c.backbone.channels = {4, 8, 8, 8};
  c.backbone.classes = 4;
  c.troi_enabled = troi;
  return c;
}

Tensor small_video(Rng& rng) { return random_tensor({2, 16, 16, 3}, rng, 0, 1); }

TEST_F(Backbone, StageSizesShrink) {
  BackboneSpec s;
  const auto sizes = s.stage_sizes();
  EXPECT_EQ(sizes[0], (std::pair<std::size_t, std::size_t>{16, 16}));
  EXPECT_EQ(sizes[3], (std::pair<std::size_t, std::size_t>{2, 2}));
  s.width = s.height = 8;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST_F(Backbone, StageIndexMapping) {
  EXPECT_EQ(stage_index(InsertionPoint::kConv3), 1u);
  EXPECT_EQ(stage_index(InsertionPoint::kConv4), 2u);
  EXPECT_EQ(stage_index(InsertionPoint::kConv5), 3u);
}

TEST_F(Backbone, ZeroHeadGivesZeroLogits) {
  Model m = Model::create(small_config(), 1);
  for (double& v : m.head_weight.mutable_data()) v = 0.0;
  Rng rng(81);
  const Tensor z = m.forward(small_video(rng), {random_box(rng, 2)});
  ASSERT_EQ(z.shape(), (Shape{4}));
  for (double v : z.data()) EXPECT_EQ(v, 0.0);
}

TEST_F(Backbone, BypassMatchesModelWithoutTroi) {
  const Model with = Model::create(small_config(true), 3);
  Model without = Model::create(small_config(false), 99);
  for (std::size_t s = 0; s < kStages; ++s) {
    without.conv_weight[s] = with.conv_weight[s];
    without.conv_bias[s] = with.conv_bias[s];
  }
  without.head_weight = with.head_weight;
  without.head_bias = with.head_bias;
  Rng rng(82);
  const Tensor v = small_video(rng);
  TroiTrace trace;
  EXPECT_EQ(values(with.forward(v, {}, &trace)), values(without.forward(v, {})));
  EXPECT_TRUE(trace.bypassed);
}

TEST_F(Backbone, RoisChangeLogitsWhenTroiEnabled) {
  const Model m = Model::create(small_config(), 4);
  Rng rng(83);
  const Tensor v = small_video(rng);
  EXPECT_NE(values(m.forward(v, {})), values(m.forward(v, {{0, 0.1, 0.1, 0.6, 0.6, Entity::kHand}})));
}

TEST_F(Backbone, FramePermutationWithoutRois) {
  // Average pooling over time makes the bypass path frame-order free.
  const Model m = Model::create(small_config(), 5);
  Rng rng(84);
  const Tensor v = small_video(rng);
  std::vector<double> swapped = values(v);
  const std::size_t half = swapped.size() / 2;
  std::rotate(swapped.begin(), swapped.begin() + static_cast<std::ptrdiff_t>(half), swapped.end());
  const auto a = values(m.forward(v, {})), b = values(m.forward(Tensor::from(v.shape(), swapped), {}));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST_F(Backbone, WrongInputShapeRejected) {
  const Model m = Model::create(small_config(), 6);
  Rng rng(85);
  EXPECT_THROW(m.forward(random_tensor({2, 16, 16, 4}, rng), {}), DimensionError);
}

TEST_F(Backbone, SameSeedSameWeights) {
  const auto a = Model::create(small_config(), 7).parameters();
  const auto b = Model::create(small_config(), 7).parameters();
  const auto c = Model::create(small_config(), 8).parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(values(a[i]), values(b[i]));
  EXPECT_NE(values(a[0]), values(c[0]));
}

TEST_F(Backbone, UniformLogitsLossIsLogK) {
  EXPECT_NEAR(cross_entropy(Tensor::zeros({4}), 2).item(), std::log(4.0), 1e-15);
}

TEST_F(Backbone, CrossEntropyMatchesLogSumExp) {
  Rng rng(86);
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor z = random_tensor({6}, rng, -20, 20);
    const std::size_t y = static_cast<std::size_t>(rng.integer(0, 5));
    double s = 0.0;
    for (double v : z.data()) s += std::exp(v);
    EXPECT_NEAR(cross_entropy(z, y).item(), std::log(s) - z.data()[y], 1e-9);
  }
}

TEST_F(Backbone, CrossEntropyStableForHugeLogits) {
  const double l = cross_entropy(Tensor::from({3}, {1000, 0, -1000}), 1).item();
  EXPECT_TRUE(std::isfinite(l));
  EXPECT_NEAR(l, 1000.0, 1e-9);
}

TEST_F(Backbone, LabelOutOfRange) { EXPECT_THROW(cross_entropy(Tensor::zeros({4}), 4), ContractError); }

TEST_F(Backbone, CrossEntropyGradient) {
  const Tensor z = Tensor::from({3}, {0.5, -1.0, 2.0}, true);
  cross_entropy(z, 0).backward();
  double s = 0.0;
  for (double v : z.data()) s += std::exp(v);
  const std::vector<double> g(z.grad().begin(), z.grad().end());
  EXPECT_NEAR(g[0], std::exp(0.5) / s - 1.0, 1e-12);
  EXPECT_NEAR(g[2], std::exp(2.0) / s, 1e-12);
}

TEST_F(Backbone, CanonicalRoundTrip) {
  ModelConfig c = small_config();
  c.troi.at = InsertionPoint::kConv5;
  c.troi.layers = 2;
  c.troi.scene_token = true;
  c.troi.order = RoiOrder::kRightToLeft;
  const ModelConfig back = ModelConfig::parse_canonical(c.canonical());
  EXPECT_EQ(back.canonical(), c.canonical());
  EXPECT_EQ(back.troi.at, InsertionPoint::kConv5);
  EXPECT_EQ(back.backbone.channels[1], 8u);
}

TEST_F(Backbone, CheckpointRoundTrip) {
  testing::TempDir dir("ckpt");
  const std::string path = dir.str() + "/m.ckpt";
  PrecisionScope f32(Precision::kFloat32);
  Model m = Model::create(small_config(), 9);
  for (Tensor& p : m.parameters())
    for (double& v : p.mutable_data()) v = static_cast<double>(static_cast<float>(v));
  CheckpointState st;
  st.epoch = 7;
  st.velocity = {Tensor::full({3}, 0.25)};
  save_checkpoint(path, m, st);
  CheckpointState back;
  const Model loaded = load_checkpoint(path, &back);
  EXPECT_EQ(back.epoch, 7u);
  ASSERT_EQ(back.velocity.size(), 1u);
  EXPECT_EQ(values(back.velocity[0]), (std::vector<double>{0.25, 0.25, 0.25}));
  EXPECT_EQ(loaded.config().canonical(), m.config().canonical());
  const auto a = m.parameters(), b = loaded.parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(values(a[i]), values(b[i]));
  Rng rng(87);
  const Tensor v = small_video(rng);
  EXPECT_EQ(values(m.forward(v, {})), values(loaded.forward(v, {})));
}

TEST_F(Backbone, CheckpointBadMagic) {
  testing::TempDir dir("ckpt_magic");
  const std::string path = dir.str() + "/bad.ckpt";
  std::ofstream(path) << "NOTACHECKPOINT";
  EXPECT_THROW(load_checkpoint(path), IoError);
  EXPECT_THROW(load_checkpoint(dir.str() + "/absent.ckpt"), IoError);
}

TEST_F(Backbone, CheckpointDigestMismatch) {
  testing::TempDir dir("ckpt_digest");
  const std::string path = dir.str() + "/m.ckpt";
  save_checkpoint(path, Model::create(small_config(), 10));
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(8 + 4 + 8 + 4 + 2);  // inside the config text
  f.put('#');
  f.close();
  EXPECT_THROW(load_checkpoint(path), IoError);
}

TEST_F(Backbone, Gradient) {
  GradcheckOptions o;
  o.seed = 4;
  EXPECT_TRUE(gradcheck_op("backbone_loss", o).passed);
}

}  // namespace
}  // namespace troikit
