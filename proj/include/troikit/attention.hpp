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

#ifndef TROIKIT_ATTENTION_HPP_
#define TROIKIT_ATTENTION_HPP_

#include <cstddef>
#include <vector>

#include "troikit/rng.hpp"
#include "troikit/tensor.hpp"

namespace troikit {

// Parameters of one encoder layer over C-wide ROI features with m heads.
// Head h reads columns [h*d, (h+1)*d) of each of the q, k and v blocks of
// qkv_weight, where d = C/m.
struct EncoderLayerParams {
  std::size_t channels = 0;
  std::size_t heads = 0;
  Tensor qkv_weight;  // [C, 3C]
  Tensor out_weight;  // [m*d, C]
  Tensor mlp_w1;      // [C, hidden]
  Tensor mlp_b1;      // [hidden]
  Tensor mlp_w2;      // [hidden, C]
  Tensor mlp_b2;      // [C]
  Tensor ln1_gamma, ln1_beta;
  Tensor ln2_gamma, ln2_beta;

  std::size_t head_width() const { return channels / heads; }
  std::vector<Tensor> parameters() const;
};

// Hidden width of the feed-forward block relative to C.
inline constexpr std::size_t kMlpRatio = 2;

// Weights uniform in +-1/sqrt(fan_in), biases zero, gamma one, beta zero.
// Throws ConfigError unless heads divides channels.
EncoderLayerParams init_encoder_layer(std::size_t channels, std::size_t heads, Rng& rng);
// Same shapes with every weight and bias zero (gamma one, beta zero).
EncoderLayerParams zero_encoder_layer(std::size_t channels, std::size_t heads);

struct HeadProjection {
  Tensor q;  // [N, d]
  Tensor k;  // [N, d]
  Tensor v;  // [N, d]
};

// Per-head slices of F * qkv_weight.
std::vector<HeadProjection> project_qkv(const Tensor& f, const EncoderLayerParams& params);

// softmax(q k^T / sqrt(d)) over rows.
Tensor attention_weights(const Tensor& q, const Tensor& k);

// A * v for one head.
Tensor self_attention(const HeadProjection& head);

// Concatenated head outputs times out_weight. When `attention` is non-null the
// per-head weight matrices are appended to it.
Tensor multi_head(const Tensor& f, const EncoderLayerParams& params, std::vector<Tensor>* attention = nullptr);

// G = LN(MHA(F) + F); F' = LN(MLP(G) + G) with MLP = linear, ReLU, linear.
Tensor encoder_layer(const Tensor& f, const EncoderLayerParams& params, std::vector<Tensor>* attention = nullptr);

// Layers applied in sequence, each consuming the previous output.
Tensor encode(const Tensor& f, const std::vector<EncoderLayerParams>& layers, std::vector<Tensor>* attention = nullptr);

}  // namespace troikit

#endif  // TROIKIT_ATTENTION_HPP_
