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

#include "troikit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "troikit/error.hpp"
#include "troikit/ops.hpp"
#include "troikit/rng.hpp"

namespace troikit {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Calls fn(i) for i in [0, n) across up to `threads` workers. Each index is
// written by exactly one worker, so results do not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.integer(0, static_cast<int>(i - 1)));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace

std::vector<std::size_t> TrainConfig::boundaries() const {
  if (!lr_boundaries.empty()) return lr_boundaries;
  // Short runs: a drop at epoch 0 or a repeated drop is meaningless, skip it.
  std::vector<std::size_t> b;
  for (std::size_t e : {epochs / 3, 2 * epochs / 3})
    if (e > 0 && (b.empty() || e > b.back())) b.push_back(e);
  return b;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch == 0) throw ConfigError("batch size must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw ConfigError("weight decay must be >= 0");
  const auto b = boundaries();
  for (std::size_t i = 1; i < b.size(); ++i) {
    if (b[i] <= b[i - 1]) throw ConfigError("lr boundaries must be strictly increasing");
  }
}

TrainConfig paper_schedule() {
  TrainConfig c;
  c.epochs = 80;
  c.lr = 0.01;
  c.lr_boundaries = {20, 40};
  return c;
}

double lr_at(std::size_t epoch, const TrainConfig& config) {
  double lr = config.lr;
  for (std::size_t b : config.boundaries()) {
    if (epoch >= b) lr /= 10.0;
  }
  return lr;
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TROIKIT_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void sgd_step(const std::vector<Tensor>& params, SgdState& state, double lr, double momentum, double weight_decay) {
  if (state.velocity.empty()) {
    for (const Tensor& p : params) state.velocity.emplace_back(p.numel(), 0.0);
  }
  if (state.velocity.size() != params.size()) {
    throw ContractError("optimizer state holds " + std::to_string(state.velocity.size()) + " tensors for " +
                        std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].has_grad()) {
      throw ContractError("parameter " + std::to_string(i) + " " + shape_str(params[i].shape()) + " has no gradient");
    }
    if (state.velocity[i].size() != params[i].numel()) throw ContractError("optimizer state shape mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor p = params[i];
    const auto g = p.grad();
    auto theta = p.mutable_data();
    auto& v = state.velocity[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      v[j] = momentum * v[j] + g[j] + weight_decay * theta[j];
      theta[j] -= lr * v[j];
    }
    round_storage(v);
    round_storage(theta);
    p.zero_grad();
  }
}

Metrics score_logits(const std::vector<std::vector<double>>& logits, const std::vector<std::size_t>& labels,
                     std::size_t k) {
  if (logits.empty()) throw ContractError("cannot score an empty set");
  if (logits.size() != labels.size()) throw ContractError("logit and label counts differ");
  const std::size_t classes = logits.front().size();
  Metrics m;
  m.count = logits.size();
  m.k = k;
  m.per_class.assign(classes, 0.0);
  m.class_count.assign(classes, 0);
  std::size_t hit1 = 0, hitk = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto& z = logits[i];
    const std::size_t y = labels[i];
    if (z.size() != classes || y >= classes) throw ContractError("logit width or label out of range");
    // Rank of the true class: strictly larger logits, plus equal ones at lower index.
    std::size_t rank = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      if (z[c] > z[y] || (z[c] == z[y] && c < y)) ++rank;
    }
    if (rank == 0) {
      ++hit1;
      m.per_class[y] += 1.0;
    }
    if (rank < k) ++hitk;
    ++m.class_count[y];
  }
  m.top1 = static_cast<double>(hit1) / static_cast<double>(m.count);
  m.topk = static_cast<double>(hitk) / static_cast<double>(m.count);
  for (std::size_t c = 0; c < classes; ++c) {
    m.per_class[c] = m.class_count[c] ? m.per_class[c] / static_cast<double>(m.class_count[c])
                                      : std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

Metrics evaluate(const Model& model, const Dataset& data, std::size_t k, const Corruption& corruption,
                 std::size_t threads) {
  if (data.empty()) throw ContractError("cannot evaluate on an empty dataset");
  std::vector<std::vector<double>> logits(data.size());
  std::vector<std::size_t> labels(data.size());
  parallel_for(data.size(), resolve_threads(threads), [&](std::size_t i) {
    const Tensor z = model.forward(data[i].frames, corrupt_rois(data[i].rois, corruption));
    logits[i].assign(z.data().begin(), z.data().end());
    labels[i] = data[i].label;
  });
  return score_logits(logits, labels, k);
}

std::string metrics_header() { return "epoch\tlr\ttrain_loss\tval_top1\tval_topk"; }

std::string format_record(const EpochRecord& r) {
  return std::to_string(r.epoch) + "\t" + num(r.lr) + "\t" + num(r.train_loss) + "\t" + num(r.val_top1) + "\t" +
         num(r.val_topk);
}

std::vector<EpochRecord> train(Model& model, const Dataset& train_set, const Dataset& val_set,
                               const TrainConfig& config, CheckpointState& state, const TrainHooks& hooks) {
  config.validate();
  if (train_set.empty()) throw ContractError("training set is empty");
  PrecisionScope scope(config.precision);
  const std::size_t threads = resolve_threads(config.threads);
  const std::vector<Tensor> params = model.parameters();

  SgdState sgd;
  if (!state.velocity.empty()) {
    if (state.velocity.size() != params.size()) throw ContractError("checkpoint velocity does not match the model");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (state.velocity[i].numel() != params[i].numel()) throw ContractError("checkpoint velocity shape mismatch");
      sgd.velocity.emplace_back(state.velocity[i].data().begin(), state.velocity[i].data().end());
    }
  }

  if (!hooks.metrics_path.empty() && state.epoch == 0) {
    std::ofstream out(hooks.metrics_path, std::ios::trunc);
    if (!out) throw IoError("cannot write metrics log " + hooks.metrics_path);
    out << metrics_header() << '\n';
  }

  std::vector<EpochRecord> log;
  for (std::size_t epoch = state.epoch; epoch < config.epochs; ++epoch) {
    const double lr = lr_at(epoch, config);
    const auto order = shuffled(train_set.size(), mix_seed(config.seed, 0x5348554646ull + epoch));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t n = std::min(config.batch, order.size() - start);
      std::vector<Tensor> losses(n);
      parallel_for(n, threads, [&](std::size_t i) {
        const SynthVideo& v = train_set[order[start + i]];
        losses[i] = cross_entropy(model.forward(v.frames, v.rois), v.label);
      });
      Tensor total = losses[0];
      for (std::size_t i = 1; i < n; ++i) total = add(total, losses[i]);
      for (const Tensor& l : losses) loss_sum += l.item();
      scale(total, 1.0 / static_cast<double>(n)).backward();
      sgd_step(params, sgd, lr, config.momentum, config.weight_decay);
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    if (!val_set.empty()) {
      const Metrics m = evaluate(model, val_set, hooks.eval_k, {}, threads);
      rec.val_top1 = m.top1;
      rec.val_topk = m.topk;
    }
    if (!std::isfinite(rec.train_loss)) throw NumericError("training diverged at epoch " + std::to_string(rec.epoch));

    state.epoch = static_cast<std::uint32_t>(rec.epoch);
    state.velocity.clear();
    for (std::size_t i = 0; i < params.size(); ++i) state.velocity.push_back(Tensor::from(params[i].shape(), sgd.velocity[i]));

    if (!hooks.metrics_path.empty()) {
      std::ofstream out(hooks.metrics_path, std::ios::app);
      if (!out) throw IoError("cannot append to metrics log " + hooks.metrics_path);
      out << format_record(rec) << '\n';
    }
    if (!hooks.checkpoint_path.empty()) save_checkpoint(hooks.checkpoint_path, model, state);
    if (hooks.on_epoch) hooks.on_epoch(rec);
    log.push_back(rec);
  }
  return log;
}

std::vector<AblationRow> run_ablation(const ModelConfig& base, const Dataset& train_set, const Dataset& val_set,
                                      const TrainConfig& config, const std::vector<InsertionPoint>& placements,
                                      const std::vector<std::size_t>& depths) {
  std::vector<AblationRow> rows;
  for (InsertionPoint at : placements) {
    for (std::size_t layers : depths) {
      ModelConfig mc = base;
      mc.troi_enabled = true;
      mc.troi.at = at;
      mc.troi.layers = layers;
      PrecisionScope scope(config.precision);
      Model model = Model::create(mc, config.seed);
      CheckpointState state;
      const auto log = train(model, train_set, {}, config, state);
      AblationRow row;
      row.at = at;
      row.layers = layers;
      row.final_loss = log.empty() ? 0.0 : log.back().train_loss;
      row.val = evaluate(model, val_set, 5, {}, config.threads);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_ablation(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "placement\tlayers\ttrain_loss\tval_top1\tval_top5\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s\t%zu\t%.4f\t%.4f\t%.4f\n", insertion_name(r.at), r.layers, r.final_loss,
                  r.val.top1, r.val.topk);
    os << buf;
  }
  return os.str();
}

}  // namespace troikit
