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

#include "troikit/attention.hpp"

#include <cmath>

#include "troikit/error.hpp"
#include "troikit/ops.hpp"

namespace troikit {

namespace {

void check_heads(std::size_t channels, std::size_t heads) {
  if (heads == 0 || channels == 0 || channels % heads != 0) {
    throw ConfigError("attention width " + std::to_string(channels) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
}

Tensor uniform(Shape shape, double bound, Rng& rng) {
  std::vector<double> data(numel(shape));
  for (double& v : data) v = rng.uniform(-bound, bound);
  return Tensor::from(std::move(shape), std::move(data), true);
}

EncoderLayerParams shaped(std::size_t channels, std::size_t heads) {
  check_heads(channels, heads);
  EncoderLayerParams p;
  p.channels = channels;
  p.heads = heads;
  const std::size_t hidden = kMlpRatio * channels;
  p.qkv_weight = Tensor::zeros({channels, 3 * channels}, true);
  p.out_weight = Tensor::zeros({channels, channels}, true);
  p.mlp_w1 = Tensor::zeros({channels, hidden}, true);
  p.mlp_b1 = Tensor::zeros({hidden}, true);
  p.mlp_w2 = Tensor::zeros({hidden, channels}, true);
  p.mlp_b2 = Tensor::zeros({channels}, true);
  p.ln1_gamma = Tensor::full({channels}, 1.0, true);
  p.ln1_beta = Tensor::zeros({channels}, true);
  p.ln2_gamma = Tensor::full({channels}, 1.0, true);
  p.ln2_beta = Tensor::zeros({channels}, true);
  return p;
}

}  // namespace

std::vector<Tensor> EncoderLayerParams::parameters() const {
  return {qkv_weight, out_weight, mlp_w1, mlp_b1, mlp_w2, mlp_b2, ln1_gamma, ln1_beta, ln2_gamma, ln2_beta};
}

EncoderLayerParams zero_encoder_layer(std::size_t channels, std::size_t heads) { return shaped(channels, heads); }

EncoderLayerParams init_encoder_layer(std::size_t channels, std::size_t heads, Rng& rng) {
  EncoderLayerParams p = shaped(channels, heads);
  const std::size_t hidden = kMlpRatio * channels;
  const double bound_c = 1.0 / std::sqrt(static_cast<double>(channels));
  const double bound_h = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.qkv_weight = uniform({channels, 3 * channels}, bound_c, rng);
  p.out_weight = uniform({channels, channels}, bound_c, rng);
  p.mlp_w1 = uniform({channels, hidden}, bound_c, rng);
  p.mlp_w2 = uniform({hidden, channels}, bound_h, rng);
  return p;
}

std::vector<HeadProjection> project_qkv(const Tensor& f, const EncoderLayerParams& params) {
  check_heads(params.channels, params.heads);
  if (f.rank() != 2 || f.dim(1) != params.channels) {
    throw DimensionError("project_qkv: features " + shape_str(f.shape()) + " vs width " +
                         std::to_string(params.channels));
  }
  const std::size_t c = params.channels;
  const std::size_t d = params.head_width();
  const Tensor qkv = matmul(f, params.qkv_weight);
  std::vector<HeadProjection> heads;
  heads.reserve(params.heads);
  for (std::size_t h = 0; h < params.heads; ++h) {
    heads.push_back({slice_cols(qkv, h * d, (h + 1) * d), slice_cols(qkv, c + h * d, c + (h + 1) * d),
                     slice_cols(qkv, 2 * c + h * d, 2 * c + (h + 1) * d)});
  }
  return heads;
}

Tensor attention_weights(const Tensor& q, const Tensor& k) {
  if (q.rank() != 2 || k.rank() != 2 || q.dim(1) != k.dim(1)) {
    throw DimensionError("attention_weights: q " + shape_str(q.shape()) + " vs k " + shape_str(k.shape()));
  }
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(q.dim(1)));
  return softmax_rows(scale(matmul(q, transpose(k)), inv_sqrt));
}

Tensor self_attention(const HeadProjection& head) { return matmul(attention_weights(head.q, head.k), head.v); }

Tensor multi_head(const Tensor& f, const EncoderLayerParams& params, std::vector<Tensor>* attention) {
  std::vector<Tensor> outputs;
  for (const HeadProjection& head : project_qkv(f, params)) {
    Tensor a = attention_weights(head.q, head.k);
    if (attention) attention->push_back(a);
    outputs.push_back(matmul(a, head.v));
  }
  const Tensor joined = outputs.size() == 1 ? outputs.front() : concat_cols(outputs);
  return matmul(joined, params.out_weight);
}

Tensor encoder_layer(const Tensor& f, const EncoderLayerParams& params, std::vector<Tensor>* attention) {
  const Tensor g = layer_norm(add(multi_head(f, params, attention), f), params.ln1_gamma, params.ln1_beta);
  const Tensor hidden = relu(linear(g, params.mlp_w1, params.mlp_b1));
  const Tensor mlp = linear(hidden, params.mlp_w2, params.mlp_b2);
  return layer_norm(add(mlp, g), params.ln2_gamma, params.ln2_beta);
}

Tensor encode(const Tensor& f, const std::vector<EncoderLayerParams>& layers, std::vector<Tensor>* attention) {
  Tensor x = f;
  for (const auto& layer : layers) x = encoder_layer(x, layer, attention);
  return x;
}

}  // namespace troikit
