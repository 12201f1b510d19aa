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

#include "troikit/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "troikit/error.hpp"
#include "troikit/synthgen.hpp"

namespace troikit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  errno = 0;
  const unsigned long long x = std::strtoull(v.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError(key + ": value out of range");
  return static_cast<std::size_t>(x);
}

double parse_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(x)) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_csv(const std::string& v) {
  std::vector<std::string> out;
  std::istringstream is(v);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "train",   "val",       "out",      "metrics",     "resume",      "corrupt", "k",        "epochs",
      "batch",   "lr",        "momentum", "weight_decay", "lr_boundaries", "seed",  "precision", "threads",
      "troi",    "troi_at",   "troi_layers", "heads",    "variant",     "order",   "channels", "classes"};
  return k;
}

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = normalize_key(trim(raw_key));
  const std::string v = trim(raw_value);
  if (key == "train") train_dir = v;
  else if (key == "val") val_dir = v;
  else if (key == "out") out = v;
  else if (key == "metrics") metrics = v;
  else if (key == "resume") resume = parse_bool(key, v);
  else if (key == "corrupt") {
    if (!v.empty() && v != "none") Corruption::parse(v);
    corrupt = v == "none" ? "" : v;
  } else if (key == "k") k = parse_size(key, v);
  else if (key == "epochs") train.epochs = parse_size(key, v);
  else if (key == "batch") train.batch = parse_size(key, v);
  else if (key == "lr") train.lr = parse_real(key, v);
  else if (key == "momentum") train.momentum = parse_real(key, v);
  else if (key == "weight_decay") train.weight_decay = parse_real(key, v);
  else if (key == "lr_boundaries") {
    train.lr_boundaries.clear();
    if (v != "thirds") {
      for (const auto& item : split_csv(v)) train.lr_boundaries.push_back(parse_size(key, item));
    }
  } else if (key == "seed") train.seed = parse_size(key, v);
  else if (key == "precision") {
    if (v == "32" || v == "float32") train.precision = Precision::kFloat32;
    else if (v == "64" || v == "float64") train.precision = Precision::kFloat64;
    else throw ConfigError("precision: expected 32 or 64, got '" + v + "'");
  } else if (key == "threads") train.threads = parse_size(key, v);
  else if (key == "troi") model.troi_enabled = parse_bool(key, v);
  else if (key == "troi_at") model.troi.at = parse_insertion(v);
  else if (key == "troi_layers") model.troi.layers = parse_size(key, v);
  else if (key == "heads") model.troi.heads = parse_size(key, v);
  else if (key == "variant") {
    model.troi.scene_token = false;
    model.troi.coord_encoding = false;
    for (const auto& item : split_csv(v)) {
      if (item == "scene") model.troi.scene_token = true;
      else if (item == "coord") model.troi.coord_encoding = true;
      else if (item != "none") throw ConfigError("variant: unknown item '" + item + "' (expected scene, coord or none)");
    }
  } else if (key == "order") {
    if (v == "lr" || v == "left-to-right") model.troi.order = RoiOrder::kLeftToRight;
    else if (v == "rl" || v == "right-to-left") model.troi.order = RoiOrder::kRightToLeft;
    else throw ConfigError("order: expected lr or rl, got '" + v + "'");
  } else if (key == "channels") {
    const auto items = split_csv(v);
    if (items.size() != kStages) throw ConfigError("channels: expected " + std::to_string(kStages) + " values");
    for (std::size_t s = 0; s < kStages; ++s) model.backbone.channels[s] = parse_size(key, items[s]);
  } else if (key == "classes") model.backbone.classes = parse_size(key, v);
  else throw ConfigError("unknown config key '" + raw_key + "'");
}

std::string RunConfig::get(const std::string& raw_key) const {
  const std::string key = normalize_key(trim(raw_key));
  auto real = [](double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  };
  if (key == "train") return train_dir;
  if (key == "val") return val_dir;
  if (key == "out") return out;
  if (key == "metrics") return metrics;
  if (key == "resume") return resume ? "true" : "false";
  if (key == "corrupt") return corrupt;
  if (key == "k") return std::to_string(k);
  if (key == "epochs") return std::to_string(train.epochs);
  if (key == "batch") return std::to_string(train.batch);
  if (key == "lr") return real(train.lr);
  if (key == "momentum") return real(train.momentum);
  if (key == "weight_decay") return real(train.weight_decay);
  if (key == "lr_boundaries") return train.lr_boundaries.empty() ? "thirds" : join_sizes(train.lr_boundaries);
  if (key == "seed") return std::to_string(train.seed);
  if (key == "precision") return train.precision == Precision::kFloat64 ? "64" : "32";
  if (key == "threads") return std::to_string(train.threads);
  if (key == "troi") return model.troi_enabled ? "true" : "false";
  if (key == "troi_at") return insertion_name(model.troi.at);
  if (key == "troi_layers") return std::to_string(model.troi.layers);
  if (key == "heads") return std::to_string(model.troi.heads);
  if (key == "variant") {
    std::string s;
    if (model.troi.scene_token) s = "scene";
    if (model.troi.coord_encoding) s += s.empty() ? "coord" : ",coord";
    return s.empty() ? "none" : s;
  }
  if (key == "order") return model.troi.order == RoiOrder::kLeftToRight ? "lr" : "rl";
  if (key == "channels") return join_sizes({model.backbone.channels.begin(), model.backbone.channels.end()});
  if (key == "classes") return std::to_string(model.backbone.classes);
  throw ConfigError("unknown config key '" + raw_key + "'");
}

void RunConfig::load_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    load_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void RunConfig::validate() const {
  train.validate();
  model.backbone.validate();
  if (model.backbone.classes == 0) throw ConfigError("classes must be positive");
  if (k == 0) throw ConfigError("k must be positive");
  if (model.troi_enabled) {
    const std::size_t c = model.backbone.channels[stage_index(model.troi.at)];
    if (model.troi.layers == 0) throw ConfigError("troi_layers must be positive");
    if (model.troi.heads == 0 || c % model.troi.heads != 0) {
      throw ConfigError("heads (" + std::to_string(model.troi.heads) + ") must divide the " +
                        std::to_string(c) + " channels at " + insertion_name(model.troi.at));
    }
    if (c % 2 != 0) throw ConfigError("TROI width must be even");
    if (model.troi.coord_encoding && c % 4 != 0) throw ConfigError("coord variant needs channels divisible by 4");
  }
  if (!corrupt.empty()) Corruption::parse(corrupt);
}

}  // namespace troikit
