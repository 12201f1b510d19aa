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

#include "troikit/posenc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "troikit/error.hpp"

namespace troikit {

using detail::accumulate;
using detail::Node;

std::vector<std::size_t> order_rois(const std::vector<RoiBox>& rois, RoiOrder order) {
  std::vector<std::size_t> idx(rois.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const bool ltr = order == RoiOrder::kLeftToRight;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const RoiBox& ra = rois[a];
    const RoiBox& rb = rois[b];
    if (ra.frame != rb.frame) return ra.frame < rb.frame;
    if (ra.x1 != rb.x1) return ltr ? ra.x1 < rb.x1 : ra.x1 > rb.x1;
    return ra.y1 < rb.y1;
  });
  std::vector<std::size_t> positions(rois.size());
  for (std::size_t rank = 0; rank < idx.size(); ++rank) positions[idx[rank]] = rank;
  return positions;
}

std::vector<double> sinusoidal_encoding(std::size_t pos, std::size_t channels) {
  if (channels % 2 != 0) throw ConfigError("sinusoidal encoding needs an even width, got " + std::to_string(channels));
  std::vector<double> code(channels);
  const double p = static_cast<double>(pos);
  for (std::size_t i = 0; i < channels / 2; ++i) {
    const double angle = p / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(channels));
    code[2 * i] = std::sin(angle);
    code[2 * i + 1] = std::cos(angle);
  }
  return code;
}

Tensor sinusoidal_table(const std::vector<std::size_t>& positions, std::size_t channels) {
  std::vector<double> data;
  data.reserve(positions.size() * channels);
  for (std::size_t p : positions) {
    auto code = sinusoidal_encoding(p, channels);
    data.insert(data.end(), code.begin(), code.end());
  }
  return Tensor::from({positions.size(), channels}, std::move(data));
}

std::size_t coord_slot_width(std::size_t channels) {
  if (channels == 0 || channels % 4 != 0) {
    throw ConfigError("coordinate encoding needs a width divisible by 4, got " + std::to_string(channels));
  }
  return channels / 4;
}

Tensor coord_encoding(const std::vector<RoiBox>& boxes, const Tensor& projection) {
  if (projection.rank() != 2 || projection.dim(0) != 4) {
    throw ConfigError("coord projection must be [4, C/4], got " + shape_str(projection.shape()));
  }
  const std::size_t q = projection.dim(1);
  const std::size_t c = 4 * q;
  const std::size_t n = boxes.size();
  auto coords = std::make_shared<std::vector<double>>();
  coords->reserve(n * 4);
  for (const RoiBox& b : boxes) coords->insert(coords->end(), {b.x1, b.y1, b.x2, b.y2});

  std::vector<double> out(n * c);
  auto w = projection.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t j = 0; j < q; ++j) out[i * c + k * q + j] = (*coords)[i * 4 + k] * w[k * q + j];

  return Tensor::make_op({n, c}, std::move(out), {projection}, [coords, n, q, c](const Node& self) {
    std::vector<double> g(4 * q, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t j = 0; j < q; ++j) g[k * q + j] += (*coords)[i * 4 + k] * self.grad[i * c + k * q + j];
    accumulate(*self.inputs[0], g);
  });
}

Tensor coord_encoding(const RoiBox& box, const Tensor& projection) {
  return coord_encoding(std::vector<RoiBox>{box}, projection);
}

}  // namespace troikit
