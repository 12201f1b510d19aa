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

#include "troikit/troi.hpp"

#include <numeric>

#include "troikit/error.hpp"
#include "troikit/ops.hpp"

namespace troikit {

const char* insertion_name(InsertionPoint p) {
  switch (p) {
    case InsertionPoint::kConv3: return "conv3";
    case InsertionPoint::kConv4: return "conv4";
    case InsertionPoint::kConv5: return "conv5";
  }
  return "conv4";
}

InsertionPoint parse_insertion(const std::string& name) {
  if (name == "conv3") return InsertionPoint::kConv3;
  if (name == "conv4") return InsertionPoint::kConv4;
  if (name == "conv5") return InsertionPoint::kConv5;
  throw ConfigError("unknown insertion point '" + name + "' (expected conv3, conv4 or conv5)");
}

std::vector<Tensor> TroiParams::parameters() const {
  std::vector<Tensor> out;
  for (const auto& layer : layers) {
    auto p = layer.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  if (coord_projection.defined()) out.push_back(coord_projection);
  return out;
}

TroiParams init_troi(const TroiConfig& config, std::size_t channels, Rng& rng) {
  if (config.layers == 0) throw ConfigError("TROI needs at least one encoder layer");
  if (channels % 2 != 0) throw ConfigError("TROI width must be even for the sinusoidal code");
  TroiParams p;
  p.channels = channels;
  for (std::size_t l = 0; l < config.layers; ++l) p.layers.push_back(init_encoder_layer(channels, config.heads, rng));
  if (config.coord_encoding) {
    const std::size_t q = coord_slot_width(channels);
    // One input per slot, so the fan-in bound is 1.
    std::vector<double> w(4 * q);
    for (double& v : w) v = rng.uniform(-1.0, 1.0);
    p.coord_projection = Tensor::from({4, q}, std::move(w), true);
  }
  return p;
}

Tensor scene_tokens(const Tensor& x) {
  if (x.rank() != 4) throw DimensionError("scene_tokens: expected [T,W,H,C], got " + shape_str(x.shape()));
  const std::size_t w = x.dim(1), h = x.dim(2);
  const Tensor pooled = max_pool(x, {w, h, w, h});
  return reshape(pooled, {x.dim(0), x.dim(3)});
}

Tensor add_scene_token(const Tensor& f, const Tensor& x, const TroiConfig& config) {
  if (!config.scene_token) return f;
  return concat_rows({f, scene_tokens(x)});
}

Tensor troi_forward(const Tensor& x, const std::vector<RoiBox>& rois, const TroiParams& params,
                    const TroiConfig& config, TroiTrace* trace) {
  if (x.rank() != 4) throw DimensionError("troi_forward: expected [T,W,H,C], got " + shape_str(x.shape()));
  if (x.dim(3) != params.channels) {
    throw ConfigError("troi_forward: feature map has " + std::to_string(x.dim(3)) + " channels, module expects " +
                      std::to_string(params.channels));
  }
  const SanitizedRois clean = sanitize_rois(rois, x.dim(0));
  if (trace) {
    trace->dropped = clean.dropped;
    trace->rois = clean.boxes.size();
    trace->bypassed = clean.boxes.empty();
  }
  if (clean.boxes.empty()) return x;

  const std::size_t c = params.channels;
  RoiFeatureSet set = extract_features(x, clean.boxes);
  set.positions = order_rois(set.boxes, config.order);
  const std::size_t n = set.size();

  Tensor f = set.features;
  if (config.coord_encoding) {
    if (!params.coord_projection.defined()) throw ConfigError("coord variant enabled without a coord projection");
    f = add(f, coord_encoding(set.boxes, params.coord_projection));
  }
  std::vector<std::size_t> positions = set.positions;
  if (config.scene_token) {
    f = add_scene_token(f, x, config);
    for (std::size_t t = 0; t < x.dim(0); ++t) positions.push_back(n + t);
  }
  f = add(f, sinusoidal_table(positions, c));

  Tensor encoded = encode(f, params.layers, trace ? &trace->attention : nullptr);
  if (config.scene_token) encoded = slice_rows(encoded, 0, n);
  if (trace) trace->footprints = set.footprints;
  return write_back(x, encoded, set.footprints);
}

}  // namespace troikit
