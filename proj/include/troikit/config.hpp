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

#ifndef TROIKIT_CONFIG_HPP_
#define TROIKIT_CONFIG_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "troikit/backbone.hpp"
#include "troikit/trainer.hpp"

namespace troikit {

// Everything one command needs. Frames and spatial size come from the data.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::string train_dir;
  std::string val_dir;
  std::string out;      // checkpoint path
  std::string metrics;  // metrics log path
  bool resume = false;
  std::string corrupt;  // empty: ground-truth boxes
  std::size_t k = 5;

  // Keys accept '-' or '_' interchangeably. Unknown keys and malformed values
  // throw ConfigError.
  void set(const std::string& key, const std::string& value);
  // "key = value" lines; '#' starts a comment. Errors name the line.
  void load_text(const std::string& text);
  void load_file(const std::string& path);
  void validate() const;
  std::string get(const std::string& key) const;

  static const std::vector<std::string>& keys();
};

}  // namespace troikit

#endif  // TROIKIT_CONFIG_HPP_
