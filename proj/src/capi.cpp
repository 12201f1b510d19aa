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

#include "troikit/troikit.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <sstream>
#include <string>

#include "troikit/backbone.hpp"
#include "troikit/config.hpp"
#include "troikit/error.hpp"
#include "troikit/gradcheck.hpp"
#include "troikit/synthgen.hpp"
#include "troikit/trainer.hpp"

struct troikit_config {
  troikit::RunConfig value;
};

struct troikit_dataset {
  troikit::Dataset videos;
};

struct troikit_model {
  troikit::Model model;
  troikit::CheckpointState state;
};

struct troikit_gradcheck {
  std::vector<troikit::GradcheckResult> rows;
};

namespace {

thread_local std::string g_last_error;

troikit_status fail(troikit_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs fn and converts any exception into a status code.
template <typename Fn>
troikit_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const troikit::ConfigError& e) {
    return fail(TROIKIT_ERR_USAGE, e.what());
  } catch (const troikit::IoError& e) {
    return fail(TROIKIT_ERR_IO, e.what());
  } catch (const troikit::NumericError& e) {
    return fail(TROIKIT_ERR_NUMERIC, e.what());
  } catch (const troikit::DimensionError& e) {
    return fail(TROIKIT_ERR_DIMENSION, e.what());
  } catch (const troikit::InvalidBoxError& e) {
    return fail(TROIKIT_ERR_INVALID_BOX, e.what());
  } catch (const troikit::ContractError& e) {
    return fail(TROIKIT_ERR_CONTRACT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TROIKIT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TROIKIT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TROIKIT_ERR_INTERNAL, "unknown error");
  }
}

#define TROIKIT_REQUIRE(cond, what) \
  if (!(cond)) return fail(TROIKIT_ERR_USAGE, what)

std::vector<std::string> split_list(const char* text) {
  std::vector<std::string> out;
  std::istringstream is(text ? text : "");
  std::string item;
  while (std::getline(is, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Adopts frame count and spatial size from the data; all videos must agree.
troikit::ModelConfig fit_to_data(troikit::ModelConfig mc, const troikit::Dataset& data) {
  const troikit::Tensor& first = data.front().frames;
  mc.backbone.frames = first.dim(0);
  mc.backbone.width = first.dim(1);
  mc.backbone.height = first.dim(2);
  mc.backbone.in_channels = first.dim(3);
  for (const auto& v : data) {
    if (v.frames.shape() != first.shape()) {
      throw troikit::DimensionError("dataset mixes video shapes " + troikit::shape_str(first.shape()) + " and " +
                                    troikit::shape_str(v.frames.shape()));
    }
    if (v.label >= mc.backbone.classes) {
      throw troikit::ConfigError("dataset has label " + std::to_string(v.label) + " but classes = " +
                                 std::to_string(mc.backbone.classes));
    }
  }
  mc.backbone.validate();
  return mc;
}

troikit::Dataset load_required(const std::string& dir, const char* what) {
  if (dir.empty()) throw troikit::ConfigError(std::string("no ") + what + " dataset given");
  auto data = troikit::load_dataset(dir);
  if (data.empty()) throw troikit::IoError(std::string(what) + " dataset at " + dir + " is empty");
  return data;
}

}  // namespace

extern "C" {

const char* troikit_version(void) { return "1.0.0"; }

const char* troikit_last_error(void) { return g_last_error.c_str(); }

const char* troikit_status_name(troikit_status status) {
  switch (status) {
    case TROIKIT_OK: return "ok";
    case TROIKIT_ERR_INTERNAL: return "internal error";
    case TROIKIT_ERR_USAGE: return "usage error";
    case TROIKIT_ERR_IO: return "i/o error";
    case TROIKIT_ERR_NUMERIC: return "numeric error";
    case TROIKIT_ERR_DIMENSION: return "dimension error";
    case TROIKIT_ERR_INVALID_BOX: return "invalid box";
    case TROIKIT_ERR_CONTRACT: return "contract violation";
  }
  return "unknown status";
}

troikit_status troikit_config_create(troikit_config** out) {
  TROIKIT_REQUIRE(out, "null output pointer");
  return guarded([&] {
    *out = new troikit_config();
    return TROIKIT_OK;
  });
}

void troikit_config_destroy(troikit_config* config) { delete config; }

troikit_status troikit_config_set(troikit_config* config, const char* key, const char* value) {
  TROIKIT_REQUIRE(config && key && value, "null argument");
  return guarded([&] {
    config->value.set(key, value);
    return TROIKIT_OK;
  });
}

troikit_status troikit_config_load_file(troikit_config* config, const char* path) {
  TROIKIT_REQUIRE(config && path, "null argument");
  return guarded([&] {
    config->value.load_file(path);
    return TROIKIT_OK;
  });
}

troikit_status troikit_config_validate(const troikit_config* config) {
  TROIKIT_REQUIRE(config, "null config");
  return guarded([&] {
    config->value.validate();
    return TROIKIT_OK;
  });
}

troikit_status troikit_config_get(const troikit_config* config, const char* key, char* buf, size_t cap,
                                  size_t* needed) {
  TROIKIT_REQUIRE(config && key, "null argument");
  return guarded([&] {
    const std::string v = config->value.get(key);
    if (needed) *needed = v.size() + 1;
    if (buf && cap > 0) {
      const size_t n = std::min(cap - 1, v.size());
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
    }
    return TROIKIT_OK;
  });
}

void troikit_gen_options_default(troikit_gen_options* options) {
  if (!options) return;
  const troikit::DatasetSpec spec;
  options->classes = spec.classes;
  options->per_class = spec.per_class;
  options->seed = spec.seed;
  options->frames = spec.frames;
  options->size = spec.size;
  options->force = 0;
}

troikit_status troikit_dataset_generate(const char* dir, const troikit_gen_options* options, size_t* count) {
  TROIKIT_REQUIRE(dir && options, "null argument");
  return guarded([&] {
    troikit::DatasetSpec spec;
    spec.classes = options->classes;
    spec.per_class = options->per_class;
    spec.seed = options->seed;
    spec.frames = options->frames;
    spec.size = options->size;
    // Check before generating so a refused overwrite costs nothing.
    if (!options->force && std::filesystem::exists(std::filesystem::path(dir) / "manifest.txt")) {
      throw troikit::IoError(std::string("dataset already exists at ") + dir + " (pass --force to overwrite)");
    }
    const auto videos = troikit::build_dataset(spec);
    troikit::save_dataset(dir, videos, options->force != 0);
    if (count) *count = videos.size();
    return TROIKIT_OK;
  });
}

troikit_status troikit_dataset_load(const char* dir, troikit_dataset** out) {
  TROIKIT_REQUIRE(dir && out, "null argument");
  return guarded([&] {
    auto* d = new troikit_dataset();
    try {
      d->videos = troikit::load_dataset(dir);
    } catch (...) {
      delete d;
      throw;
    }
    *out = d;
    return TROIKIT_OK;
  });
}

size_t troikit_dataset_size(const troikit_dataset* dataset) { return dataset ? dataset->videos.size() : 0; }

void troikit_dataset_destroy(troikit_dataset* dataset) { delete dataset; }

const char* troikit_class_name(size_t label) {
  if (label >= troikit::kNumActionClasses) return nullptr;
  return troikit::class_name(static_cast<troikit::ActionClass>(label));
}

troikit_status troikit_train(const troikit_config* config, troikit_epoch_callback callback, void* user) {
  TROIKIT_REQUIRE(config, "null config");
  return guarded([&] {
    const troikit::RunConfig& rc = config->value;
    rc.validate();
    if (rc.out.empty()) throw troikit::ConfigError("no checkpoint path (out) given");
    troikit::PrecisionScope scope(rc.train.precision);
    const troikit::Dataset train_set = load_required(rc.train_dir, "training");
    const troikit::Dataset val_set = rc.val_dir.empty() ? troikit::Dataset{} : load_required(rc.val_dir, "validation");
    const troikit::ModelConfig mc = fit_to_data(rc.model, train_set);

    troikit::CheckpointState state;
    troikit::Model model;
    if (rc.resume && std::filesystem::exists(rc.out)) {
      model = troikit::load_checkpoint(rc.out, &state);
      if (model.config().canonical() != mc.canonical()) {
        throw troikit::ConfigError("checkpoint " + rc.out + " was trained with a different model configuration");
      }
    } else {
      model = troikit::Model::create(mc, rc.train.seed);
    }

    troikit::TrainHooks hooks;
    hooks.metrics_path = rc.metrics;
    hooks.checkpoint_path = rc.out;
    hooks.eval_k = rc.k;
    if (callback) {
      hooks.on_epoch = [&](const troikit::EpochRecord& r) {
        const troikit_epoch e{r.epoch, r.lr, r.train_loss, r.val_top1, r.val_topk};
        callback(&e, user);
      };
    }
    troikit::train(model, train_set, val_set, rc.train, state, hooks);
    if (state.epoch == 0 || !std::filesystem::exists(rc.out)) troikit::save_checkpoint(rc.out, model, state);
    return TROIKIT_OK;
  });
}

troikit_status troikit_model_load(const char* path, troikit_model** out) {
  TROIKIT_REQUIRE(path && out, "null argument");
  return guarded([&] {
    auto* m = new troikit_model();
    try {
      m->model = troikit::load_checkpoint(path, &m->state);
    } catch (...) {
      delete m;
      throw;
    }
    *out = m;
    return TROIKIT_OK;
  });
}

void troikit_model_destroy(troikit_model* model) { delete model; }

size_t troikit_model_epoch(const troikit_model* model) { return model ? model->state.epoch : 0; }

troikit_status troikit_evaluate(const troikit_model* model, const troikit_dataset* dataset, const char* corrupt,
                                size_t k, troikit_metrics* out) {
  TROIKIT_REQUIRE(model && dataset && out, "null argument");
  TROIKIT_REQUIRE(k > 0, "k must be positive");
  return guarded([&] {
    const troikit::Corruption mode =
        (corrupt && *corrupt) ? troikit::Corruption::parse(corrupt) : troikit::Corruption{};
    const troikit::Metrics m = troikit::evaluate(model->model, dataset->videos, k, mode);
    if (m.per_class.size() > TROIKIT_MAX_CLASSES) throw troikit::ContractError("too many classes for the C report");
    *out = troikit_metrics{};
    out->count = m.count;
    out->k = m.k;
    out->top1 = m.top1;
    out->topk = m.topk;
    out->classes = m.per_class.size();
    for (size_t c = 0; c < m.per_class.size(); ++c) {
      out->per_class[c] = m.per_class[c];
      out->class_count[c] = m.class_count[c];
    }
    return TROIKIT_OK;
  });
}

troikit_status troikit_ablate(const troikit_config* config, const char* placements, const char* depths,
                              char** table) {
  TROIKIT_REQUIRE(config && table, "null argument");
  return guarded([&] {
    const troikit::RunConfig& rc = config->value;
    rc.validate();
    std::vector<troikit::InsertionPoint> at;
    for (const auto& p : split_list(placements)) at.push_back(troikit::parse_insertion(p));
    std::vector<std::size_t> layers;
    for (const auto& d : split_list(depths)) {
      if (d.find_first_not_of("0123456789") != std::string::npos || std::stoul(d) == 0) {
        throw troikit::ConfigError("depth '" + d + "' is not a positive integer");
      }
      layers.push_back(std::stoul(d));
    }
    if (at.empty() || layers.empty()) throw troikit::ConfigError("ablation needs at least one placement and depth");
    troikit::PrecisionScope scope(rc.train.precision);
    const troikit::Dataset train_set = load_required(rc.train_dir, "training");
    const troikit::Dataset val_set = load_required(rc.val_dir, "validation");
    const troikit::ModelConfig mc = fit_to_data(rc.model, train_set);
    const auto rows = troikit::run_ablation(mc, train_set, val_set, rc.train, at, layers);
    const std::string text = troikit::format_ablation(rows);
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *table = buf;
    return TROIKIT_OK;
  });
}

void troikit_string_free(char* s) { std::free(s); }

troikit_status troikit_gradcheck_run(const char* op, uint64_t seed, size_t points, double perturb,
                                     troikit_gradcheck** out) {
  TROIKIT_REQUIRE(out, "null output pointer");
  TROIKIT_REQUIRE(points > 0, "points must be positive");
  return guarded([&] {
    troikit::GradcheckOptions o;
    o.seed = seed;
    o.points = points;
    o.perturb = perturb;
    auto* r = new troikit_gradcheck();
    try {
      if (op && *op) {
        r->rows.push_back(troikit::gradcheck_op(op, o));
      } else {
        r->rows = troikit::gradcheck_all(o);
      }
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
    return TROIKIT_OK;
  });
}

size_t troikit_gradcheck_count(const troikit_gradcheck* report) { return report ? report->rows.size() : 0; }

troikit_status troikit_gradcheck_row(const troikit_gradcheck* report, size_t index, const char** op,
                                     double* max_rel_error, int* passed) {
  TROIKIT_REQUIRE(report, "null report");
  if (index >= report->rows.size()) return fail(TROIKIT_ERR_CONTRACT, "row index out of range");
  const auto& row = report->rows[index];
  if (op) *op = row.op.c_str();
  if (max_rel_error) *max_rel_error = row.max_rel_error;
  if (passed) *passed = row.passed ? 1 : 0;
  return TROIKIT_OK;
}

void troikit_gradcheck_destroy(troikit_gradcheck* report) { delete report; }

}  // extern "C"
