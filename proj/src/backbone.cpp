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

#include "troikit/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "troikit/error.hpp"
#include "troikit/ops.hpp"
#include "troikit/rng.hpp"
#include "troikit/serialize.hpp"

namespace troikit {

using detail::accumulate;
using detail::Node;

namespace {

constexpr char kMagic[8] = {'T', 'R', 'O', 'I', 'K', 'I', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

std::size_t conv_out(std::size_t n, std::size_t stride) { return (n + 2 - kKernel) / stride + 1; }

Tensor uniform(Shape shape, double bound, Rng& rng) {
  std::vector<double> data(numel(shape));
  for (double& v : data) v = rng.uniform(-bound, bound);
  return Tensor::from(std::move(shape), std::move(data), true);
}

template <std::size_t N>
std::string join(const std::array<std::size_t, N>& values) {
  std::string s;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) s += ',';
    s += std::to_string(values[i]);
  }
  return s;
}

template <std::size_t N>
std::array<std::size_t, N> split(const std::string& text) {
  std::array<std::size_t, N> out{};
  std::stringstream ss(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= N) throw IoError("too many entries in '" + text + "'");
    out[i++] = std::stoul(item);
  }
  if (i != N) throw IoError("too few entries in '" + text + "'");
  return out;
}

}  // namespace

std::array<std::pair<std::size_t, std::size_t>, kStages> BackboneSpec::stage_sizes() const {
  std::array<std::pair<std::size_t, std::size_t>, kStages> sizes{};
  std::size_t w = width, h = height;
  for (std::size_t s = 0; s < kStages; ++s) {
    if (strides[s] == 0) throw ConfigError("stage stride must be positive");
    if (w + 2 < kKernel || h + 2 < kKernel) throw ConfigError("input too small for the backbone");
    const std::size_t nw = conv_out(w, strides[s]);
    const std::size_t nh = conv_out(h, strides[s]);
    if (nw >= w || nh >= h) {
      throw ConfigError("stage " + std::to_string(s + 1) + " does not reduce the spatial size (" + std::to_string(w) +
                        "x" + std::to_string(h) + " -> " + std::to_string(nw) + "x" + std::to_string(nh) + ")");
    }
    w = nw;
    h = nh;
    sizes[s] = {w, h};
  }
  return sizes;
}

void BackboneSpec::validate() const {
  if (frames == 0 || width == 0 || height == 0) throw ConfigError("video extents must be positive");
  if (in_channels == 0) throw ConfigError("input channels must be positive");
  if (classes < 2) throw ConfigError("need at least two classes");
  for (std::size_t c : channels) {
    if (c == 0) throw ConfigError("stage channels must be positive");
  }
  (void)stage_sizes();
}

std::size_t stage_index(InsertionPoint p) {
  switch (p) {
    case InsertionPoint::kConv3: return 1;
    case InsertionPoint::kConv4: return 2;
    case InsertionPoint::kConv5: return 3;
  }
  return 2;
}

std::string ModelConfig::canonical() const {
  std::ostringstream os;
  os << "frames=" << backbone.frames << ";width=" << backbone.width << ";height=" << backbone.height
     << ";in_channels=" << backbone.in_channels << ";channels=" << join(backbone.channels)
     << ";strides=" << join(backbone.strides) << ";classes=" << backbone.classes
     << ";troi=" << (troi_enabled ? 1 : 0) << ";troi_at=" << insertion_name(troi.at)
     << ";troi_layers=" << troi.layers << ";heads=" << troi.heads << ";scene=" << (troi.scene_token ? 1 : 0)
     << ";coord=" << (troi.coord_encoding ? 1 : 0)
     << ";order=" << (troi.order == RoiOrder::kLeftToRight ? "lr" : "rl");
  return os.str();
}

ModelConfig ModelConfig::parse_canonical(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw IoError("malformed model config entry '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw IoError(std::string("model config lacks '") + key + "'");
    return it->second;
  };
  ModelConfig c;
  try {
    c.backbone.frames = std::stoul(get("frames"));
    c.backbone.width = std::stoul(get("width"));
    c.backbone.height = std::stoul(get("height"));
    c.backbone.in_channels = std::stoul(get("in_channels"));
    c.backbone.channels = split<kStages>(get("channels"));
    c.backbone.strides = split<kStages>(get("strides"));
    c.backbone.classes = std::stoul(get("classes"));
    c.troi_enabled = get("troi") == "1";
    c.troi.at = parse_insertion(get("troi_at"));
    c.troi.layers = std::stoul(get("troi_layers"));
    c.troi.heads = std::stoul(get("heads"));
    c.troi.scene_token = get("scene") == "1";
    c.troi.coord_encoding = get("coord") == "1";
    c.troi.order = get("order") == "rl" ? RoiOrder::kRightToLeft : RoiOrder::kLeftToRight;
  } catch (const std::logic_error& e) {
    throw IoError(std::string("malformed model config: ") + e.what());
  }
  return c;
}

Model Model::create(const ModelConfig& config, std::uint64_t seed) {
  config.backbone.validate();
  Model m;
  m.config_ = config;
  Rng rng(mix_seed(seed, 0x6261636b626f6e65ull));
  std::size_t cin = config.backbone.in_channels;
  for (std::size_t s = 0; s < kStages; ++s) {
    const std::size_t cout = config.backbone.channels[s];
    const double fan_in = static_cast<double>(kKernel * kKernel * cin);
    m.conv_weight[s] = uniform({kKernel, kKernel, cin, cout}, std::sqrt(6.0 / fan_in), rng);
    m.conv_bias[s] = Tensor::zeros({cout}, true);
    cin = cout;
  }
  if (config.troi_enabled) {
    Rng troi_rng(mix_seed(seed, 0x74726f69ull));
    m.troi = init_troi(config.troi, config.backbone.channels[stage_index(config.troi.at)], troi_rng);
  }
  m.head_weight = uniform({cin, config.backbone.classes}, 1.0 / std::sqrt(static_cast<double>(cin)), rng);
  m.head_bias = Tensor::zeros({config.backbone.classes}, true);
  return m;
}

Tensor Model::forward(const Tensor& video, const std::vector<RoiBox>& rois, TroiTrace* trace) const {
  const BackboneSpec& spec = config_.backbone;
  if (video.rank() != 4 || video.dim(1) != spec.width || video.dim(2) != spec.height ||
      video.dim(3) != spec.in_channels) {
    throw DimensionError("model expects [T," + std::to_string(spec.width) + "," + std::to_string(spec.height) + "," +
                         std::to_string(spec.in_channels) + "] video, got " + shape_str(video.shape()));
  }
  const std::size_t troi_stage = stage_index(config_.troi.at);
  Tensor x = video;
  for (std::size_t s = 0; s < kStages; ++s) {
    x = relu(conv2d(x, conv_weight[s], conv_bias[s], {spec.strides[s], 1}));
    if (config_.troi_enabled && s == troi_stage) x = troi_forward(x, rois, troi, config_.troi, trace);
  }
  const std::size_t c = x.dim(3);
  const Tensor pooled = reshape(mean_rows(reshape(x, {x.numel() / c, c})), {1, c});
  return reshape(linear(pooled, head_weight, head_bias), {spec.classes});
}

std::vector<Tensor> Model::parameters() const {
  std::vector<Tensor> out;
  for (std::size_t s = 0; s < kStages; ++s) {
    out.push_back(conv_weight[s]);
    out.push_back(conv_bias[s]);
  }
  if (config_.troi_enabled) {
    auto p = troi.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  out.push_back(head_weight);
  out.push_back(head_bias);
  return out;
}

Tensor cross_entropy(const Tensor& logits, std::size_t label) {
  if (logits.rank() != 1) throw DimensionError("cross_entropy: logits must be a vector, got " + shape_str(logits.shape()));
  const std::size_t k = logits.dim(0);
  if (label >= k) {
    throw ContractError("cross_entropy: label " + std::to_string(label) + " outside [0," + std::to_string(k) + ")");
  }
  auto z = logits.data();
  const double mx = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - mx);
  const double lse = mx + std::log(total);
  return Tensor::make_op({}, {lse - z[label]}, {logits}, [label, lse, k](const Node& self) {
    const auto& zin = self.inputs[0]->value;
    std::vector<double> g(k);
    for (std::size_t i = 0; i < k; ++i) g[i] = std::exp(zin[i] - lse) * self.grad[0];
    g[label] -= self.grad[0];
    accumulate(*self.inputs[0], g);
  });
}

void save_checkpoint(const std::string& path, const Model& model, const CheckpointState& state) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint " + path + " for writing");
  const std::string text = model.config().canonical();
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, kVersion);
  write_u64(os, fnv1a64(text));
  write_u32(os, static_cast<std::uint32_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_u32(os, state.epoch);
  const auto params = model.parameters();
  write_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const Tensor& p : params) write_tensor(os, p);
  write_u32(os, static_cast<std::uint32_t>(state.velocity.size()));
  for (const Tensor& v : state.velocity) write_tensor(os, v);
  if (!os) throw IoError("failed writing checkpoint " + path);
}

Model load_checkpoint(const std::string& path, CheckpointState* state) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path);
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (is.gcount() != sizeof(magic) || !std::equal(magic, magic + sizeof(magic), kMagic)) {
    throw IoError(path + " is not a troikit checkpoint");
  }
  if (read_u32(is) != kVersion) throw IoError(path + ": unsupported checkpoint version");
  const std::uint64_t digest = read_u64(is);
  const std::uint32_t len = read_u32(is);
  if (len > (1u << 16)) throw IoError(path + ": config header too long");
  std::string text(len, '\0');
  is.read(text.data(), len);
  if (is.gcount() != static_cast<std::streamsize>(len)) throw IoError(path + ": truncated config header");
  if (fnv1a64(text) != digest) throw IoError(path + ": config digest mismatch");

  Model model = Model::create(ModelConfig::parse_canonical(text), 0);
  const std::uint32_t epoch = read_u32(is);
  auto params = model.parameters();
  if (read_u32(is) != params.size()) throw IoError(path + ": parameter count does not match its config");
  for (Tensor& p : params) {
    const Tensor stored = read_tensor(is);
    if (stored.shape() != p.shape()) {
      throw IoError(path + ": parameter shape " + shape_str(stored.shape()) + " vs expected " + shape_str(p.shape()));
    }
    std::copy(stored.data().begin(), stored.data().end(), p.mutable_data().begin());
  }
  const std::uint32_t nvel = read_u32(is);
  std::vector<Tensor> velocity;
  for (std::uint32_t i = 0; i < nvel; ++i) velocity.push_back(read_tensor(is));
  if (state) {
    state->epoch = epoch;
    state->velocity = std::move(velocity);
  }
  return model;
}

}  // namespace troikit
