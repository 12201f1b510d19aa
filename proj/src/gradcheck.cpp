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

#include "troikit/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "troikit/attention.hpp"
#include "troikit/backbone.hpp"
#include "troikit/error.hpp"
#include "troikit/ops.hpp"
#include "troikit/rng.hpp"
#include "troikit/roi.hpp"
#include "troikit/troi.hpp"

namespace troikit {

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0, bool grad = true) {
  std::vector<double> v(numel(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::from(std::move(shape), std::move(v), grad);
}

// Keeps values at least `gap` away from zero so no probe straddles a kink.
Tensor away_from_zero(Shape shape, Rng& rng, double gap) {
  std::vector<double> v(numel(shape));
  for (double& x : v) {
    x = rng.uniform(gap, 1.0);
    if (rng.uniform() < 0.5) x = -x;
  }
  return Tensor::from(std::move(shape), std::move(v), true);
}

// Contracts an arbitrary output with fixed random weights, so every output
// element carries a distinct upstream gradient.
std::function<Tensor()> weighted(std::function<Tensor()> f, Rng& rng) {
  const Tensor probe = f();
  const Tensor r = random_tensor(probe.shape(), rng, -1.0, 1.0, false);
  return [f = std::move(f), r] { return sum(mul(f(), r)); };
}

RoiBox random_box(Rng& rng, std::size_t frames) {
  RoiBox b;
  b.frame = static_cast<std::size_t>(rng.integer(0, static_cast<int>(frames) - 1));
  const double w = rng.uniform(0.2, 0.7), h = rng.uniform(0.2, 0.7);
  b.x1 = rng.uniform(0.0, 1.0 - w);
  b.y1 = rng.uniform(0.0, 1.0 - h);
  b.x2 = b.x1 + w;
  b.y2 = b.y1 + h;
  b.entity = rng.uniform() < 0.5 ? Entity::kHand : Entity::kObject;
  return b;
}

void randomize_norms(EncoderLayerParams& p, Rng& rng) {
  for (Tensor* t : {&p.ln1_gamma, &p.ln2_gamma}) {
    for (double& v : t->mutable_data()) v = rng.uniform(0.5, 1.5);
  }
  for (Tensor* t : {&p.ln1_beta, &p.ln2_beta, &p.mlp_b1, &p.mlp_b2}) {
    for (double& v : t->mutable_data()) v = rng.uniform(-0.5, 0.5);
  }
}

struct Case {
  std::vector<Tensor> inputs;
  std::function<Tensor()> loss;
};

Case build_case(const std::string& op, Rng& rng) {
  if (op == "matmul") {
    Tensor a = random_tensor({4, 5}, rng), b = random_tensor({5, 3}, rng);
    return {{a, b}, weighted([=] { return matmul(a, b); }, rng)};
  }
  if (op == "softmax") {
    Tensor x = random_tensor({3, 6}, rng, -2.0, 2.0);
    return {{x}, weighted([=] { return softmax_rows(x); }, rng)};
  }
  if (op == "layer_norm") {
    Tensor x = random_tensor({4, 8}, rng, -2.0, 2.0);
    Tensor g = random_tensor({8}, rng, 0.5, 1.5), b = random_tensor({8}, rng);
    return {{x, g, b}, weighted([=] { return layer_norm(x, g, b); }, rng)};
  }
  if (op == "relu") {
    Tensor x = away_from_zero({5, 6}, rng, 0.05);
    return {{x}, weighted([=] { return relu(x); }, rng)};
  }
  if (op == "linear") {
    Tensor x = random_tensor({4, 6}, rng), w = random_tensor({6, 5}, rng), b = random_tensor({5}, rng);
    return {{x, w, b}, weighted([=] { return linear(x, w, b); }, rng)};
  }
  if (op == "conv2d") {
    Tensor x = random_tensor({2, 7, 6, 3}, rng), w = random_tensor({3, 3, 3, 4}, rng), b = random_tensor({4}, rng);
    return {{x, w, b}, weighted([=] { return conv2d(x, w, b, {2, 1}); }, rng)};
  }
  if (op == "roi_align") {
    Tensor x = random_tensor({6, 5, 4}, rng);
    const RoiBox box = random_box(rng, 1);
    return {{x}, weighted([=] { return roi_align(x, box, 3); }, rng)};
  }
  if (op == "encoder_layer") {
    EncoderLayerParams p = init_encoder_layer(8, 2, rng);
    randomize_norms(p, rng);
    Tensor f = random_tensor({5, 8}, rng);
    std::vector<Tensor> inputs{f};
    for (const Tensor& t : p.parameters()) inputs.push_back(t);
    return {inputs, weighted([=] { return encoder_layer(f, p); }, rng)};
  }
  if (op == "troi_forward") {
    TroiConfig cfg;
    cfg.heads = 2;
    cfg.scene_token = true;
    cfg.coord_encoding = true;
    TroiParams p = init_troi(cfg, 8, rng);
    for (auto& layer : p.layers) randomize_norms(layer, rng);
    Tensor x = random_tensor({2, 4, 4, 8}, rng);
    std::vector<RoiBox> rois;
    for (int i = 0; i < 3; ++i) rois.push_back(random_box(rng, 2));
    std::vector<Tensor> inputs{x};
    for (const Tensor& t : p.parameters()) inputs.push_back(t);
    return {inputs, weighted([=] { return troi_forward(x, rois, p, cfg); }, rng)};
  }
  if (op == "backbone_loss") {
    ModelConfig mc;
    mc.backbone.frames = 2;
    mc.backbone.width = 16;
    mc.backbone.height = 16;
    mc.backbone.channels = {4, 8, 8, 8};
    mc.backbone.classes = 4;
    mc.troi.heads = 2;
    const Model model = Model::create(mc, rng.next());
    const Tensor video = random_tensor({2, 16, 16, 3}, rng, 0.0, 1.0, false);
    std::vector<RoiBox> rois;
    for (int i = 0; i < 3; ++i) rois.push_back(random_box(rng, 2));
    const auto label = static_cast<std::size_t>(rng.integer(0, 3));
    return {model.parameters(), [=] { return cross_entropy(model.forward(video, rois), label); }};
  }
  throw ConfigError("unknown gradcheck op '" + op + "'");
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

GradcheckResult check_gradients(const std::string& name, const std::vector<Tensor>& inputs,
                                const std::function<Tensor()>& loss, const GradcheckOptions& options) {
  if (inputs.empty()) throw ContractError("gradcheck needs at least one input");
  for (Tensor t : inputs) t.zero_grad();
  loss().backward();
  std::vector<std::vector<double>> analytic;
  for (Tensor t : inputs) {
    analytic.emplace_back(t.grad().begin(), t.grad().end());
    t.zero_grad();
  }

  Rng rng(mix_seed(options.seed, 0x6663ull));
  GradcheckResult result;
  result.op = name;
  result.points = options.points;
  for (std::size_t p = 0; p < options.points; ++p) {
    const auto which = static_cast<std::size_t>(rng.integer(0, static_cast<int>(inputs.size()) - 1));
    Tensor t = inputs[which];
    const auto idx = static_cast<std::size_t>(rng.integer(0, static_cast<int>(t.numel()) - 1));
    auto data = t.mutable_data();
    const double saved = data[idx];
    data[idx] = saved + options.step;
    const double up = loss().item();
    data[idx] = saved - options.step;
    const double down = loss().item();
    data[idx] = saved;
    const double numeric = (up - down) / (2.0 * options.step);
    const double a = analytic[which][idx] * (1.0 + options.perturb);
    result.max_rel_error = std::max(result.max_rel_error, relative_error(a, numeric));
  }
  result.passed = result.max_rel_error < options.tolerance;
  return result;
}

const std::vector<std::string>& gradcheck_ops() {
  static const std::vector<std::string> ops = {"matmul", "softmax",   "layer_norm",    "relu",         "linear",
                                               "conv2d", "roi_align", "encoder_layer", "troi_forward", "backbone_loss"};
  return ops;
}

GradcheckResult gradcheck_op(const std::string& op, const GradcheckOptions& options) {
  PrecisionScope scope(Precision::kFloat64);
  const auto& ops = gradcheck_ops();
  const auto it = std::find(ops.begin(), ops.end(), op);
  if (it == ops.end()) throw ConfigError("unknown gradcheck op '" + op + "'");
  Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(it - ops.begin())));
  Case c = build_case(op, rng);
  return check_gradients(op, c.inputs, c.loss, options);
}

std::vector<GradcheckResult> gradcheck_all(const GradcheckOptions& options) {
  std::vector<GradcheckResult> out;
  for (const auto& op : gradcheck_ops()) out.push_back(gradcheck_op(op, options));
  return out;
}

}  // namespace troikit
