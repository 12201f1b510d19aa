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

#include "troikit/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "troikit/error.hpp"
#include "troikit/rng.hpp"
#include "troikit/serialize.hpp"

namespace troikit {

namespace fs = std::filesystem;

namespace {

constexpr std::array<const char*, kNumActionClasses> kClassNames = {"put-beside", "cover",     "uncover",
                                                                    "swap",       "move-away", "split"};

using Color = std::array<float, 3>;

constexpr std::array<Color, 6> kPalette = {{{0.90f, 0.20f, 0.20f},
                                           {0.20f, 0.80f, 0.20f},
                                           {0.20f, 0.30f, 0.90f},
                                           {0.90f, 0.90f, 0.20f},
                                           {0.20f, 0.80f, 0.80f},
                                           {0.80f, 0.30f, 0.80f}}};
constexpr Color kHandColor = {0.95f, 0.75f, 0.60f};

struct Vec2 {
  double x;
  double y;
};

Vec2 lerp(Vec2 a, Vec2 b, double u) { return {a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u}; }

// Axis-aligned sprite drawn as an integer pixel rectangle.
struct Sprite {
  double cx, cy;
  int w, h;
  Color color;
  Entity entity;
};

// Everything drawn from the seed alone.
struct Setup {
  int scale_px(double v) const { return std::max(1, static_cast<int>(std::lround(v * scale))); }
  double scale = 1.0;
  int hand_w = 0, hand_h = 0;
  int a_w = 0, a_h = 0, b_w = 0, b_h = 0;
  Color a_color{}, b_color{};
  Vec2 hand{}, a{}, b{};
};

Setup draw_setup(std::uint64_t seed, std::size_t size) {
  Rng rng(mix_seed(seed, 1));
  Setup s;
  s.scale = static_cast<double>(size) / 32.0;
  s.hand_w = s.scale_px(10);
  s.hand_h = s.scale_px(10);
  s.a_w = s.scale_px(rng.integer(6, 8));
  s.a_h = s.scale_px(rng.integer(6, 8));
  s.b_w = s.scale_px(rng.integer(6, 8));
  s.b_h = s.scale_px(rng.integer(6, 8));
  const int ca = rng.integer(0, 5);
  const int cb = (ca + rng.integer(1, 5)) % 6;
  s.a_color = kPalette[static_cast<std::size_t>(ca)];
  s.b_color = kPalette[static_cast<std::size_t>(cb)];
  const double sz = static_cast<double>(size);
  s.a = {(8.0 + 4.0 * rng.uniform()) * s.scale, (18.0 + 8.0 * rng.uniform()) * s.scale};
  s.b = {(24.0 - 4.0 * rng.uniform()) * s.scale, (18.0 + 8.0 * rng.uniform()) * s.scale};
  s.hand = {(16.0 + 6.0 * (rng.uniform() - 0.5)) * s.scale, (5.0 + 2.0 * rng.uniform()) * s.scale};
  if (rng.uniform() < 0.5) {
    s.a.x = sz - s.a.x;
    s.b.x = sz - s.b.x;
    s.hand.x = sz - s.hand.x;
  }
  return s;
}

Sprite hand_sprite(const Setup& s, Vec2 c) { return {c.x, c.y, s.hand_w, s.hand_h, kHandColor, Entity::kHand}; }
Sprite a_sprite(const Setup& s, Vec2 c) { return {c.x, c.y, s.a_w, s.a_h, s.a_color, Entity::kObject}; }
Sprite b_sprite(const Setup& s, Vec2 c) { return {c.x, c.y, s.b_w, s.b_h, s.b_color, Entity::kObject}; }

// Hand resting on top of an object whose center is `c` and height `h`.
Vec2 above(const Setup& s, Vec2 c, int h) { return {c.x, c.y - 0.5 * h - 0.5 * s.hand_h}; }

// Sprites for action step j of k (frames 1..T-1), bottom to top.
std::vector<Sprite> action_step(const Setup& s, ActionClass action, std::size_t j, std::size_t k) {
  const double u = k > 1 ? static_cast<double>(j) / static_cast<double>(k - 1) : 1.0;
  const std::size_t mid = std::max<std::size_t>(1, (k - 1) / 2);
  auto reversed = [&](std::size_t step) { return k - 1 - step; };

  switch (action) {
    case ActionClass::kCover:
    case ActionClass::kUncover: {
      const std::size_t step = action == ActionClass::kCover ? j : reversed(j);
      const double reach = std::min(1.0, static_cast<double>(step) / static_cast<double>(mid));
      return {b_sprite(s, s.b), a_sprite(s, s.a), hand_sprite(s, lerp(s.hand, s.a, reach))};
    }
    case ActionClass::kPutBeside:
    case ActionClass::kMoveAway: {
      const std::size_t step = action == ActionClass::kPutBeside ? j : reversed(j);
      const double v = k > 1 ? static_cast<double>(step) / static_cast<double>(k - 1) : 1.0;
      const double side = s.a.x < s.b.x ? -1.0 : 1.0;
      const Vec2 target{s.b.x + side * (0.5 * s.b_w + 0.5 * s.a_w + 1.0 * s.scale), s.b.y};
      const Vec2 a = lerp(s.a, target, v);
      return {b_sprite(s, s.b), a_sprite(s, a), hand_sprite(s, above(s, a, s.a_h))};
    }
    case ActionClass::kSwap: {
      const double arc = 6.0 * s.scale * std::sin(std::numbers::pi * u);
      Vec2 a = lerp(s.a, s.b, u);
      Vec2 b = lerp(s.b, s.a, u);
      a.y -= arc;
      b.y += arc;
      return {b_sprite(s, b), a_sprite(s, a), hand_sprite(s, above(s, a, s.a_h))};
    }
    case ActionClass::kSplit: {
      std::vector<Sprite> out{b_sprite(s, s.b)};
      if (j < mid) {
        out.push_back(a_sprite(s, s.a));
      } else {
        const int left_w = std::max(1, s.a_w / 2);
        const int right_w = std::max(1, s.a_w - left_w);
        const double gap = 2.0 * s.scale * static_cast<double>(j - mid + 1);
        const double left_edge = s.a.x - 0.5 * s.a_w;
        Sprite left = a_sprite(s, {left_edge + 0.5 * left_w - gap, s.a.y});
        left.w = left_w;
        Sprite right = a_sprite(s, {left_edge + left_w + 0.5 * right_w + gap, s.a.y});
        right.w = right_w;
        out.push_back(left);
        out.push_back(right);
      }
      out.push_back(hand_sprite(s, above(s, s.a, s.a_h)));
      return out;
    }
  }
  throw ConfigError("unknown action class");
}

struct PixelRect {
  int x0, y0, x1, y1;  // half-open
};

PixelRect place(const Sprite& sp, int size) {
  int x0 = static_cast<int>(std::lround(sp.cx - 0.5 * sp.w));
  int y0 = static_cast<int>(std::lround(sp.cy - 0.5 * sp.h));
  x0 = std::clamp(x0, 0, std::max(0, size - sp.w));
  y0 = std::clamp(y0, 0, std::max(0, size - sp.h));
  return {x0, y0, std::min(size, x0 + sp.w), std::min(size, y0 + sp.h)};
}

// Renders one frame into `frame` ([W, H, 3] slice) and appends a box per
// entity with at least one visible pixel.
void render(const std::vector<Sprite>& sprites, std::uint64_t noise_seed, std::size_t t, std::size_t size,
            double* frame, std::vector<RoiBox>& rois) {
  const int n = static_cast<int>(size);
  Rng noise(noise_seed);
  for (std::size_t i = 0; i < size * size * 3; ++i) {
    frame[i] = static_cast<double>(static_cast<float>(0.15 + noise.uniform(-0.05, 0.05)));
  }
  std::vector<int> owner(size * size, -1);
  std::vector<PixelRect> rects;
  for (std::size_t id = 0; id < sprites.size(); ++id) {
    const PixelRect r = place(sprites[id], n);
    rects.push_back(r);
    for (int x = r.x0; x < r.x1; ++x)
      for (int y = r.y0; y < r.y1; ++y) owner[static_cast<std::size_t>(x * n + y)] = static_cast<int>(id);
  }
  for (std::size_t id = 0; id < sprites.size(); ++id) {
    int x0 = n, y0 = n, x1 = -1, y1 = -1;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        if (owner[static_cast<std::size_t>(x * n + y)] != static_cast<int>(id)) continue;
        double* px = frame + static_cast<std::size_t>(x * n + y) * 3;
        for (std::size_t c = 0; c < 3; ++c) px[c] = static_cast<double>(sprites[id].color[c]);
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
    if (x1 < 0) continue;  // fully occluded
    const double sz = static_cast<double>(size);
    rois.push_back({t, x0 / sz, y0 / sz, (x1 + 1) / sz, (y1 + 1) / sz, sprites[id].entity});
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const char* class_name(ActionClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

ActionClass parse_class(const std::string& name) {
  for (std::size_t i = 0; i < kNumActionClasses; ++i) {
    if (name == kClassNames[i]) return static_cast<ActionClass>(i);
  }
  throw ConfigError("unknown action class '" + name + "'");
}

SynthVideo generate(std::uint64_t seed, ActionClass action, std::size_t frames, std::size_t size) {
  if (static_cast<std::size_t>(action) >= kNumActionClasses) throw ConfigError("unknown action class");
  if (frames < 4) throw ConfigError("synthetic videos need at least 4 frames");
  if (size < 16) throw ConfigError("synthetic frames must be at least 16 pixels wide");
  const Setup setup = draw_setup(seed, size);
  SynthVideo video;
  video.seed = seed;
  video.label = static_cast<std::size_t>(action);
  std::vector<double> pixels(frames * size * size * 3);
  const std::size_t steps = frames - 1;
  for (std::size_t t = 0; t < frames; ++t) {
    std::vector<Sprite> sprites;
    if (t == 0) {
      sprites = {b_sprite(setup, setup.b), a_sprite(setup, setup.a), hand_sprite(setup, setup.hand)};
    } else {
      sprites = action_step(setup, action, t - 1, steps);
    }
    render(sprites, mix_seed(seed, 100 + t), t, size, pixels.data() + t * size * size * 3, video.rois);
  }
  video.frames = Tensor::from({frames, size, size, 3}, std::move(pixels));
  return video;
}

Corruption Corruption::shift(double iou) {
  if (!(iou > 0.0 && iou <= 1.0)) throw ConfigError("target IoU must lie in (0, 1]");
  return {Kind::kShift, iou};
}

Corruption Corruption::parse(const std::string& mode) {
  if (mode == "iou@0.50") return shift(0.50);
  if (mode == "iou@0.25") return shift(0.25);
  if (mode == "iou@0.05") return shift(0.05);
  if (mode == "drop-hands") return {Kind::kDropHands, 1.0};
  if (mode == "drop-objects") return {Kind::kDropObjects, 1.0};
  if (mode == "drop-all") return {Kind::kDropAll, 1.0};
  throw ConfigError("unknown corruption mode '" + mode +
                    "' (expected iou@0.50, iou@0.25, iou@0.05, drop-hands, drop-objects or drop-all)");
}

std::string Corruption::name() const {
  switch (kind) {
    case Kind::kNone: return "gt";
    case Kind::kShift: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "iou@%.2f", target_iou);
      return buf;
    }
    case Kind::kDropHands: return "drop-hands";
    case Kind::kDropObjects: return "drop-objects";
    case Kind::kDropAll: return "drop-all";
  }
  return "gt";
}

double shift_for_iou(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("target IoU must lie in (0, 1]");
  return (1.0 - alpha) / (1.0 + alpha);
}

std::vector<RoiBox> corrupt_rois(const std::vector<RoiBox>& rois, const Corruption& mode) {
  std::vector<RoiBox> out;
  switch (mode.kind) {
    case Corruption::Kind::kNone: return rois;
    case Corruption::Kind::kDropAll: return out;
    case Corruption::Kind::kDropHands:
    case Corruption::Kind::kDropObjects: {
      const Entity drop = mode.kind == Corruption::Kind::kDropHands ? Entity::kHand : Entity::kObject;
      for (const RoiBox& b : rois)
        if (b.entity != drop) out.push_back(b);
      return out;
    }
    case Corruption::Kind::kShift: {
      const double frac = shift_for_iou(mode.target_iou);
      for (const RoiBox& b : rois) {
        RoiBox moved = b;
        const double delta = frac * (b.x2 - b.x1);
        const double dir = 0.5 * (b.x1 + b.x2) < 0.5 ? 1.0 : -1.0;
        moved.x1 += dir * delta;
        moved.x2 += dir * delta;
        if (auto clipped = clip_box(moved)) out.push_back(*clipped);
      }
      return out;
    }
  }
  return out;
}

std::vector<SynthVideo> build_dataset(const DatasetSpec& spec) {
  if (spec.classes == 0 || spec.classes > kNumActionClasses) {
    throw ConfigError("class count must be in [1, " + std::to_string(kNumActionClasses) + "]");
  }
  const std::size_t total = spec.classes * spec.per_class;
  std::vector<SynthVideo> videos;
  videos.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    videos.push_back(generate(mix_seed(spec.seed, i), static_cast<ActionClass>(i % spec.classes), spec.frames, spec.size));
  }
  return videos;
}

void save_dataset(const std::string& dir, const std::vector<SynthVideo>& videos, bool force) {
  const fs::path root(dir);
  const fs::path manifest = root / "manifest.txt";
  std::error_code ec;
  if (fs::exists(manifest, ec) && !force) {
    throw IoError("dataset already exists at " + dir + " (pass --force to overwrite)");
  }
  fs::create_directories(root / "videos", ec);
  if (ec) throw IoError("cannot create " + (root / "videos").string() + ": " + ec.message());

  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw IoError("cannot write " + manifest.string());
  for (std::size_t i = 0; i < videos.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "videos/%06zu.tensor", i);
    save_tensor_file((root / name).string(), videos[i].frames);
    out << name << '\t' << videos[i].label << '\t' << videos[i].frames.dim(0) << '\t';
    if (videos[i].rois.empty()) out << '-';
    for (std::size_t r = 0; r < videos[i].rois.size(); ++r) {
      const RoiBox& b = videos[i].rois[r];
      if (r) out << ';';
      out << b.frame << ',' << format_double(b.x1) << ',' << format_double(b.y1) << ',' << format_double(b.x2) << ','
          << format_double(b.y2) << ',' << entity_name(b.entity);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + manifest.string());
}

std::vector<SynthVideo> load_dataset(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream in(root / "manifest.txt");
  if (!in) throw IoError("no dataset manifest in " + dir);
  std::vector<SynthVideo> videos;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string path, label, frames, boxes;
    if (!std::getline(ls, path, '\t') || !std::getline(ls, label, '\t') || !std::getline(ls, frames, '\t') ||
        !std::getline(ls, boxes)) {
      throw IoError("manifest line " + std::to_string(lineno) + " is malformed");
    }
    SynthVideo v;
    try {
      v.label = std::stoul(label);
      const std::size_t t = std::stoul(frames);
      if (boxes != "-") {
        std::istringstream bs(boxes);
        std::string item;
        while (std::getline(bs, item, ';')) {
          std::istringstream fsx(item);
          std::string f, x1, y1, x2, y2, ent;
          std::getline(fsx, f, ',');
          std::getline(fsx, x1, ',');
          std::getline(fsx, y1, ',');
          std::getline(fsx, x2, ',');
          std::getline(fsx, y2, ',');
          std::getline(fsx, ent, ',');
          v.rois.push_back({std::stoul(f), std::stod(x1), std::stod(y1), std::stod(x2), std::stod(y2), parse_entity(ent)});
        }
      }
      v.frames = load_tensor_file((root / path).string());
      if (v.frames.rank() != 4 || v.frames.dim(0) != t) {
        throw IoError("video " + path + " has shape " + shape_str(v.frames.shape()) + ", manifest says T=" + frames);
      }
    } catch (const std::logic_error& e) {
      throw IoError("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
    videos.push_back(std::move(v));
  }
  return videos;
}

}  // namespace troikit
