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

#include "troikit/roi.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

#include "troikit/error.hpp"

namespace troikit {

using detail::accumulate;
using detail::Node;

const char* entity_name(Entity e) {
  switch (e) {
    case Entity::kHand: return "hand";
    case Entity::kObject: return "object";
    case Entity::kScene: return "scene";
  }
  return "object";
}

Entity parse_entity(const std::string& name) {
  if (name == "hand") return Entity::kHand;
  if (name == "object") return Entity::kObject;
  if (name == "scene") return Entity::kScene;
  throw IoError("unknown entity tag '" + name + "'");
}

std::optional<RoiBox> clip_box(const RoiBox& box) {
  RoiBox c = box;
  c.x1 = std::clamp(box.x1, 0.0, 1.0);
  c.y1 = std::clamp(box.y1, 0.0, 1.0);
  c.x2 = std::clamp(box.x2, 0.0, 1.0);
  c.y2 = std::clamp(box.y2, 0.0, 1.0);
  if (!(c.x1 < c.x2) || !(c.y1 < c.y2)) return std::nullopt;
  return c;
}

SanitizedRois sanitize_rois(const std::vector<RoiBox>& rois, std::size_t frames) {
  SanitizedRois out;
  out.boxes.reserve(rois.size());
  for (const RoiBox& b : rois) {
    if (b.frame >= frames) {
      throw InvalidBoxError("roi frame " + std::to_string(b.frame) + " outside [0," +
                            std::to_string(frames) + ")");
    }
    if (auto c = clip_box(b)) {
      out.boxes.push_back(*c);
    } else {
      ++out.dropped;
    }
  }
  return out;
}

namespace {

struct Tap {
  std::size_t cell;  // x * H + y within one frame
  double weight;
};

RoiBox require_valid(const RoiBox& box) {
  auto c = clip_box(box);
  if (!c) {
    throw InvalidBoxError("degenerate box [" + std::to_string(box.x1) + "," + std::to_string(box.y1) + "," +
                          std::to_string(box.x2) + "," + std::to_string(box.y2) + "]");
  }
  return *c;
}

// Bilinear taps for one sample point, coordinates in cell units where cell i
// spans [i, i+1). Samples are clamped onto the grid of cell centers.
void bilinear_taps(double x, double y, std::size_t w, std::size_t h, double weight, std::vector<Tap>& taps) {
  auto axis = [](double v, std::size_t n, std::size_t& lo, std::size_t& hi, double& frac) {
    v -= 0.5;
    if (v <= 0.0) v = 0.0;
    lo = static_cast<std::size_t>(std::floor(v));
    if (lo >= n - 1) {
      lo = hi = n - 1;
      frac = 0.0;
    } else {
      hi = lo + 1;
      frac = v - static_cast<double>(lo);
    }
  };
  std::size_t x0, x1, y0, y1;
  double fx, fy;
  axis(x, w, x0, x1, fx);
  axis(y, h, y0, y1, fy);
  taps.push_back({x0 * h + y0, weight * (1.0 - fx) * (1.0 - fy)});
  taps.push_back({x0 * h + y1, weight * (1.0 - fx) * fy});
  taps.push_back({x1 * h + y0, weight * fx * (1.0 - fy)});
  taps.push_back({x1 * h + y1, weight * fx * fy});
}

// Taps for every output bin of a box: bins[bx * out + by].
std::vector<std::vector<Tap>> align_taps(const RoiBox& box, std::size_t w, std::size_t h, std::size_t out) {
  constexpr std::size_t kSamples = 2;
  const double x0 = box.x1 * static_cast<double>(w);
  const double y0 = box.y1 * static_cast<double>(h);
  const double bin_w = (box.x2 - box.x1) * static_cast<double>(w) / static_cast<double>(out);
  const double bin_h = (box.y2 - box.y1) * static_cast<double>(h) / static_cast<double>(out);
  const double weight = 1.0 / static_cast<double>(kSamples * kSamples);
  std::vector<std::vector<Tap>> bins(out * out);
  for (std::size_t bx = 0; bx < out; ++bx) {
    for (std::size_t by = 0; by < out; ++by) {
      auto& taps = bins[bx * out + by];
      for (std::size_t sx = 0; sx < kSamples; ++sx) {
        for (std::size_t sy = 0; sy < kSamples; ++sy) {
          const double px = x0 + (static_cast<double>(bx) + (static_cast<double>(sx) + 0.5) / kSamples) * bin_w;
          const double py = y0 + (static_cast<double>(by) + (static_cast<double>(sy) + 0.5) / kSamples) * bin_h;
          bilinear_taps(px, py, w, h, weight, taps);
        }
      }
    }
  }
  return bins;
}

}  // namespace

Tensor roi_align(const Tensor& x_t, const RoiBox& box, std::size_t out) {
  if (x_t.rank() != 3) throw DimensionError("roi_align: expected [W,H,C], got " + shape_str(x_t.shape()));
  if (out == 0) throw ConfigError("roi_align: output grid must be positive");
  const std::size_t w = x_t.dim(0), h = x_t.dim(1), c = x_t.dim(2);
  if (w == 0 || h == 0) throw DimensionError("roi_align: empty feature map " + shape_str(x_t.shape()));
  const RoiBox valid = require_valid(box);
  auto bins = std::make_shared<std::vector<std::vector<Tap>>>(align_taps(valid, w, h, out));

  std::vector<double> result(out * out * c, 0.0);
  auto in = x_t.data();
  for (std::size_t b = 0; b < bins->size(); ++b)
    for (const Tap& t : (*bins)[b])
      for (std::size_t ch = 0; ch < c; ++ch) result[b * c + ch] += t.weight * in[t.cell * c + ch];

  const std::size_t n_in = x_t.numel();
  return Tensor::make_op({out, out, c}, std::move(result), {x_t}, [bins, c, n_in](const Node& self) {
    std::vector<double> g(n_in, 0.0);
    for (std::size_t b = 0; b < bins->size(); ++b)
      for (const Tap& t : (*bins)[b])
        for (std::size_t ch = 0; ch < c; ++ch) g[t.cell * c + ch] += t.weight * self.grad[b * c + ch];
    accumulate(*self.inputs[0], g);
  });
}

RoiFootprint box_to_footprint(const RoiBox& box, std::size_t width, std::size_t height) {
  auto span = [](double lo, double hi, std::size_t n, std::size_t& first, std::size_t& last) {
    const double a = lo * static_cast<double>(n);
    const double b = hi * static_cast<double>(n);
    const double max_cell = static_cast<double>(n - 1);
    const double f = std::clamp(std::ceil(a - 0.5), 0.0, max_cell);
    const double l = std::clamp(std::floor(b - 0.5), 0.0, max_cell);
    // Cell centers i + 0.5 inside [a, b].
    if (f <= l && f + 0.5 >= a && l + 0.5 <= b) {
      first = static_cast<std::size_t>(f);
      last = static_cast<std::size_t>(l);
    } else {
      const double center = std::clamp(std::floor(0.5 * (a + b)), 0.0, max_cell);
      first = last = static_cast<std::size_t>(center);
    }
  };
  RoiFootprint fp;
  fp.frame = box.frame;
  span(box.x1, box.x2, width, fp.x_first, fp.x_last);
  span(box.y1, box.y2, height, fp.y_first, fp.y_last);
  return fp;
}

RoiFeatureSet extract_features(const Tensor& x, const std::vector<RoiBox>& rois) {
  if (x.rank() != 4) throw DimensionError("extract_features: expected [T,W,H,C], got " + shape_str(x.shape()));
  const std::size_t frames = x.dim(0), w = x.dim(1), h = x.dim(2), c = x.dim(3);
  RoiFeatureSet set;
  set.boxes.reserve(rois.size());
  set.footprints.reserve(rois.size());

  // Per ROI: frame-offset taps with the bin average folded into the weights.
  auto taps = std::make_shared<std::vector<std::vector<Tap>>>();
  taps->reserve(rois.size());
  const double bin_weight = 1.0 / static_cast<double>(kPoolGrid * kPoolGrid);
  for (const RoiBox& raw : rois) {
    if (raw.frame >= frames) {
      throw InvalidBoxError("roi frame " + std::to_string(raw.frame) + " outside [0," + std::to_string(frames) + ")");
    }
    const RoiBox box = require_valid(raw);
    std::vector<Tap> merged;
    for (const auto& bin : align_taps(box, w, h, kPoolGrid)) {
      for (const Tap& t : bin) merged.push_back({box.frame * w * h + t.cell, t.weight * bin_weight});
    }
    taps->push_back(std::move(merged));
    set.boxes.push_back(box);
    set.footprints.push_back(box_to_footprint(box, w, h));
  }

  const std::size_t n = rois.size();
  std::vector<double> out(n * c, 0.0);
  auto in = x.data();
  for (std::size_t i = 0; i < n; ++i)
    for (const Tap& t : (*taps)[i])
      for (std::size_t ch = 0; ch < c; ++ch) out[i * c + ch] += t.weight * in[t.cell * c + ch];

  const std::size_t n_in = x.numel();
  set.features = Tensor::make_op({n, c}, std::move(out), {x}, [taps, c, n_in](const Node& self) {
    std::vector<double> g(n_in, 0.0);
    for (std::size_t i = 0; i < taps->size(); ++i)
      for (const Tap& t : (*taps)[i])
        for (std::size_t ch = 0; ch < c; ++ch) g[t.cell * c + ch] += t.weight * self.grad[i * c + ch];
    accumulate(*self.inputs[0], g);
  });
  return set;
}

Tensor write_back(const Tensor& x, const Tensor& features, const std::vector<RoiFootprint>& footprints) {
  if (x.rank() != 4) throw DimensionError("write_back: expected [T,W,H,C], got " + shape_str(x.shape()));
  if (features.rank() != 2 || features.dim(0) != footprints.size()) {
    throw ContractError("write_back: " + std::to_string(footprints.size()) + " footprints but features " +
                        shape_str(features.shape()));
  }
  const std::size_t frames = x.dim(0), w = x.dim(1), h = x.dim(2), c = x.dim(3);
  if (features.dim(1) != c) {
    throw DimensionError("write_back: feature width " + std::to_string(features.dim(1)) + " vs map channels " +
                         std::to_string(c));
  }
  const std::size_t cells = frames * w * h;
  auto f = features.data();

  // Contributors per cell, sorted by row contents so the mean does not depend
  // on the order of the ROI list.
  auto contributors = std::make_shared<std::vector<std::vector<std::size_t>>>(cells);
  for (std::size_t i = 0; i < footprints.size(); ++i) {
    const RoiFootprint& fp = footprints[i];
    if (fp.frame >= frames || fp.x_last >= w || fp.y_last >= h || fp.x_first > fp.x_last || fp.y_first > fp.y_last) {
      throw ContractError("write_back: footprint outside the feature map");
    }
    for (std::size_t cx = fp.x_first; cx <= fp.x_last; ++cx)
      for (std::size_t cy = fp.y_first; cy <= fp.y_last; ++cy) (*contributors)[(fp.frame * w + cx) * h + cy].push_back(i);
  }
  auto row_less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(f.begin() + static_cast<std::ptrdiff_t>(a * c),
                                        f.begin() + static_cast<std::ptrdiff_t>((a + 1) * c),
                                        f.begin() + static_cast<std::ptrdiff_t>(b * c),
                                        f.begin() + static_cast<std::ptrdiff_t>((b + 1) * c));
  };

  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t cell = 0; cell < cells; ++cell) {
    auto& list = (*contributors)[cell];
    if (list.empty()) continue;
    std::sort(list.begin(), list.end(), row_less);
    double* dst = out.data() + cell * c;
    for (std::size_t ch = 0; ch < c; ++ch) {
      double acc = 0.0;
      for (std::size_t i : list) acc += f[i * c + ch];
      dst[ch] = list.size() == 1 ? acc : acc / static_cast<double>(list.size());
    }
  }

  const std::size_t n = footprints.size();
  return Tensor::make_op(x.shape(), std::move(out), {x, features}, [contributors, c, n](const Node& self) {
    if (self.inputs[0]->requires_grad) {
      std::vector<double> g(self.grad);
      for (std::size_t cell = 0; cell < contributors->size(); ++cell) {
        if ((*contributors)[cell].empty()) continue;
        std::fill(g.begin() + static_cast<std::ptrdiff_t>(cell * c),
                  g.begin() + static_cast<std::ptrdiff_t>((cell + 1) * c), 0.0);
      }
      accumulate(*self.inputs[0], g);
    }
    if (self.inputs[1]->requires_grad) {
      std::vector<double> g(n * c, 0.0);
      for (std::size_t cell = 0; cell < contributors->size(); ++cell) {
        const auto& list = (*contributors)[cell];
        if (list.empty()) continue;
        const double inv = 1.0 / static_cast<double>(list.size());
        for (std::size_t i : list)
          for (std::size_t ch = 0; ch < c; ++ch) g[i * c + ch] += self.grad[cell * c + ch] * inv;
      }
      accumulate(*self.inputs[1], g);
    }
  });
}

double iou(const RoiBox& a, const RoiBox& b) {
  const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = ix * iy;
  const double uni = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace troikit
