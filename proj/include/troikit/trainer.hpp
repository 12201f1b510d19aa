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

#ifndef TROIKIT_TRAINER_HPP_
#define TROIKIT_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "troikit/backbone.hpp"
#include "troikit/synthgen.hpp"
#include "troikit/tensor.hpp"

namespace troikit {

using Dataset = std::vector<SynthVideo>;

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch = 16;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  // Epochs at which the rate drops tenfold. Empty means thirds of `epochs`.
  std::vector<std::size_t> lr_boundaries;
  std::uint64_t seed = 1;
  Precision precision = Precision::kFloat32;
  std::size_t threads = 0;  // 0: TROIKIT_THREADS, else hardware concurrency

  // Boundaries actually used: explicit ones, or {E/3, 2E/3} minus zero and
  // repeated entries.
  std::vector<std::size_t> boundaries() const;
  void validate() const;  // ConfigError
};

// 80-epoch recipe with drops at 20 and 40.
TrainConfig paper_schedule();

// Boundary epochs belong to the later segment.
double lr_at(std::size_t epoch, const TrainConfig& config);

// Worker count for batch-parallel forward passes.
std::size_t resolve_threads(std::size_t requested);

struct SgdState {
  std::vector<std::vector<double>> velocity;  // lazily sized to the params
};

// v <- mu v + g + lambda theta; theta <- theta - lr v. Consumes and clears
// the gradients. A parameter without a gradient is a ContractError.
void sgd_step(const std::vector<Tensor>& params, SgdState& state, double lr, double momentum, double weight_decay);

struct Metrics {
  std::size_t count = 0;
  std::size_t k = 5;
  double top1 = 0.0;
  double topk = 0.0;
  std::vector<double> per_class;         // top-1 per label, NaN when a class is absent
  std::vector<std::size_t> class_count;
};

// Ties go to the lower class index, both for argmax and for top-k rank.
Metrics score_logits(const std::vector<std::vector<double>>& logits, const std::vector<std::size_t>& labels,
                     std::size_t k);

// Deterministic; rois pass through `corruption` first. Empty data is a ContractError.
Metrics evaluate(const Model& model, const Dataset& data, std::size_t k, const Corruption& corruption = {},
                 std::size_t threads = 0);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double lr = 0.0;
  double train_loss = 0.0;
  double val_top1 = 0.0;
  double val_topk = 0.0;
};

// Tab-separated: header "epoch lr train_loss val_top1 val_topk", %.17g values.
std::string metrics_header();
std::string format_record(const EpochRecord& r);

struct TrainHooks {
  std::string metrics_path;     // appended per epoch when set
  std::string checkpoint_path;  // rewritten per epoch when set
  std::size_t eval_k = 5;
  std::function<void(const EpochRecord&)> on_epoch;
};

// Runs epochs state.epoch+1 .. config.epochs. `state` carries the optimizer
// velocity across resumes and is updated in place.
std::vector<EpochRecord> train(Model& model, const Dataset& train_set, const Dataset& val_set,
                               const TrainConfig& config, CheckpointState& state, const TrainHooks& hooks = {});

struct AblationRow {
  InsertionPoint at = InsertionPoint::kConv4;
  std::size_t layers = 1;
  Metrics val;
  double final_loss = 0.0;
};

// One fresh model per (placement, depth), all else from `base`.
std::vector<AblationRow> run_ablation(const ModelConfig& base, const Dataset& train_set, const Dataset& val_set,
                                      const TrainConfig& config, const std::vector<InsertionPoint>& placements,
                                      const std::vector<std::size_t>& depths);
std::string format_ablation(const std::vector<AblationRow>& rows);

}  // namespace troikit

#endif  // TROIKIT_TRAINER_HPP_
