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

// troikit command-line tool. Talks to the library only through troikit.h.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "troikit/troikit.h"

namespace {

// Exit codes: 0 ok, 2 usage, 3 data or I/O, 4 numeric check failed.
int exit_code(troikit_status s) {
  switch (s) {
    case TROIKIT_OK: return 0;
    case TROIKIT_ERR_USAGE: return 2;
    case TROIKIT_ERR_NUMERIC: return 4;
    case TROIKIT_ERR_IO:
    case TROIKIT_ERR_DIMENSION:
    case TROIKIT_ERR_INVALID_BOX:
    case TROIKIT_ERR_CONTRACT: return 3;
    case TROIKIT_ERR_INTERNAL: return 1;
  }
  return 1;
}

int report(troikit_status s) {
  if (s != TROIKIT_OK) std::fprintf(stderr, "troikit: %s: %s\n", troikit_status_name(s), troikit_last_error());
  return exit_code(s);
}

struct ConfigDeleter {
  void operator()(troikit_config* c) const { troikit_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<troikit_config, ConfigDeleter>;

// Flag values collected as text and forwarded as config keys, so a config
// file and flags go through the same validation. Flags win.
struct RunFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  bool no_troi = false;
  bool resume = false;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        "--" + flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  troikit_status build(ConfigPtr& out) const {
    troikit_config* raw = nullptr;
    troikit_status s = troikit_config_create(&raw);
    if (s != TROIKIT_OK) return s;
    out.reset(raw);
    if (!config_file.empty() && (s = troikit_config_load_file(raw, config_file.c_str())) != TROIKIT_OK) return s;
    for (const auto& [k, v] : values) {
      if ((s = troikit_config_set(raw, k.c_str(), v.c_str())) != TROIKIT_OK) return s;
    }
    if (no_troi && (s = troikit_config_set(raw, "troi", "false")) != TROIKIT_OK) return s;
    if (resume && (s = troikit_config_set(raw, "resume", "true")) != TROIKIT_OK) return s;
    return troikit_config_validate(raw);
  }
};

void add_training_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--config", f.config_file, "key = value file; flags override it");
  f.add(app, "train", "train", "training dataset directory");
  f.add(app, "val", "val", "validation dataset directory");
  f.add(app, "epochs", "epochs", "training epochs");
  f.add(app, "batch", "batch", "mini-batch size");
  f.add(app, "lr", "lr", "base learning rate");
  f.add(app, "momentum", "momentum", "SGD momentum");
  f.add(app, "weight-decay", "weight_decay", "L2 weight decay");
  f.add(app, "lr-boundaries", "lr_boundaries", "epochs where the rate drops 10x (default: thirds)");
  f.add(app, "seed", "seed", "initialisation and shuffling seed");
  f.add(app, "precision", "precision", "32 or 64");
  f.add(app, "threads", "threads", "forward workers (default TROIKIT_THREADS or all cores)");
  f.add(app, "troi-at", "troi_at", "conv3, conv4 or conv5");
  f.add(app, "troi-layers", "troi_layers", "encoder layers");
  f.add(app, "heads", "heads", "attention heads");
  f.add(app, "variant", "variant", "comma list of scene, coord");
  f.add(app, "order", "order", "ROI order: lr or rl");
  f.add(app, "channels", "channels", "four stage widths, e.g. 16,32,64,64");
  f.add(app, "classes", "classes", "number of classes");
  f.add(app, "k", "k", "k for top-k validation accuracy");
  app->add_flag("--no-troi", f.no_troi, "plain CNN baseline");
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

int cmd_gen(const std::string& out, const troikit_gen_options& opt) {
  size_t count = 0;
  const troikit_status s = troikit_dataset_generate(out.c_str(), &opt, &count);
  if (s == TROIKIT_OK) std::printf("wrote %zu videos to %s\n", count, out.c_str());
  return report(s);
}

void print_epoch(const troikit_epoch* e, void*) {
  std::printf("epoch %3zu  lr %.2e  loss %.4f  val top1 %.4f  topk %.4f\n", e->epoch, e->lr, e->train_loss,
              e->val_top1, e->val_topk);
  std::fflush(stdout);
}

int cmd_train(const RunFlags& flags) {
  ConfigPtr cfg;
  troikit_status s = flags.build(cfg);
  if (s != TROIKIT_OK) return report(s);
  s = troikit_train(cfg.get(), print_epoch, nullptr);
  return report(s);
}

int cmd_eval(const std::string& data, const std::string& checkpoint, const std::string& corrupt, size_t k,
             const std::string& report_path) {
  troikit_model* model = nullptr;
  troikit_status s = troikit_model_load(checkpoint.c_str(), &model);
  if (s != TROIKIT_OK) return report(s);
  std::unique_ptr<troikit_model, void (*)(troikit_model*)> model_guard(model, troikit_model_destroy);

  troikit_dataset* dataset = nullptr;
  if ((s = troikit_dataset_load(data.c_str(), &dataset)) != TROIKIT_OK) return report(s);
  std::unique_ptr<troikit_dataset, void (*)(troikit_dataset*)> data_guard(dataset, troikit_dataset_destroy);

  troikit_metrics m{};
  if ((s = troikit_evaluate(model, dataset, corrupt.c_str(), k, &m)) != TROIKIT_OK) return report(s);

  std::ostringstream os;
  os << "boxes\t" << (corrupt.empty() ? "gt" : corrupt) << "\n";
  os << "samples\t" << m.count << "\n";
  os << "top1\t" << fmt("%.6f", m.top1) << "\n";
  os << "top" << m.k << "\t" << fmt("%.6f", m.topk) << "\n";
  os << "class\tname\tcount\ttop1\n";
  for (size_t c = 0; c < m.classes; ++c) {
    const char* name = troikit_class_name(c);
    os << c << "\t" << (name ? name : "-") << "\t" << m.class_count[c] << "\t"
       << (std::isnan(m.per_class[c]) ? std::string("-") : fmt("%.6f", m.per_class[c])) << "\n";
  }
  std::fputs(os.str().c_str(), stdout);
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::trunc);
    out << os.str();
    if (!out) {
      std::fprintf(stderr, "troikit: i/o error: cannot write %s\n", report_path.c_str());
      return 3;
    }
  }
  return 0;
}

int cmd_gradcheck(const std::string& op, uint64_t seed, size_t points, double perturb) {
  troikit_gradcheck* rep = nullptr;
  const troikit_status s = troikit_gradcheck_run(op.empty() ? nullptr : op.c_str(), seed, points, perturb, &rep);
  if (s != TROIKIT_OK) return report(s);
  bool all = true;
  std::printf("%-16s %-12s %s\n", "op", "max_rel_err", "result");
  for (size_t i = 0; i < troikit_gradcheck_count(rep); ++i) {
    const char* name = nullptr;
    double err = 0.0;
    int ok = 0;
    troikit_gradcheck_row(rep, i, &name, &err, &ok);
    std::printf("%-16s %-12.3e %s\n", name, err, ok ? "pass" : "FAIL");
    all = all && ok;
  }
  troikit_gradcheck_destroy(rep);
  return all ? 0 : 4;
}

int cmd_ablate(const RunFlags& flags, const std::string& placements, const std::string& depths,
               const std::string& out) {
  ConfigPtr cfg;
  troikit_status s = flags.build(cfg);
  if (s != TROIKIT_OK) return report(s);
  char* table = nullptr;
  if ((s = troikit_ablate(cfg.get(), placements.c_str(), depths.c_str(), &table)) != TROIKIT_OK) return report(s);
  std::fputs(table, stdout);
  int rc = 0;
  if (!out.empty()) {
    std::ofstream f(out, std::ios::trunc);
    f << table;
    if (!f) {
      std::fprintf(stderr, "troikit: i/o error: cannot write %s\n", out.c_str());
      rc = 3;
    }
  }
  troikit_string_free(table);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"troikit: transformers over ROI features in conv feature maps"};
  app.set_version_flag("--version", std::string(troikit_version()));
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic relational-action dataset");
  std::string gen_out;
  troikit_gen_options gen_opt;
  troikit_gen_options_default(&gen_opt);
  bool gen_force = false;
  gen->add_option("--out", gen_out, "output directory (created if missing)")->required();
  gen->add_option("--classes", gen_opt.classes, "number of classes (1-6)")->capture_default_str();
  gen->add_option("--per-class", gen_opt.per_class, "videos per class")->capture_default_str();
  gen->add_option("--seed", gen_opt.seed, "dataset seed")->capture_default_str();
  gen->add_option("--frames", gen_opt.frames, "frames per video")->capture_default_str();
  gen->add_option("--size", gen_opt.size, "frame width and height")->capture_default_str();
  gen->add_flag("--force", gen_force, "overwrite an existing dataset");

  // train
  auto* train = app.add_subcommand("train", "train a model");
  RunFlags train_flags;
  add_training_flags(train, train_flags);
  train_flags.add(train, "out", "out", "checkpoint path");
  train_flags.add(train, "metrics", "metrics", "per-epoch metrics log (TSV)");
  train->add_flag("--resume", train_flags.resume, "continue from the checkpoint at --out if present");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_data, eval_ckpt, eval_corrupt, eval_report;
  size_t eval_k = 5;
  eval->add_option("--data", eval_data, "dataset directory")->required();
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--corrupt", eval_corrupt,
                   "iou@0.50, iou@0.25, iou@0.05, drop-hands, drop-objects or drop-all");
  eval->add_option("--k", eval_k, "k for top-k")->capture_default_str();
  eval->add_option("--report", eval_report, "also write the report here");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  std::string gc_op;
  uint64_t gc_seed = 1;
  size_t gc_points = 10;
  double gc_perturb = 0.0;
  gc->add_option("--op", gc_op, "single op to check (default: all)");
  gc->add_option("--seed", gc_seed, "seed")->capture_default_str();
  gc->add_option("--points", gc_points, "probed coordinates per op")->capture_default_str();
  gc->add_option("--perturb-grad", gc_perturb, "scale analytic gradients by 1+x (negative control)");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "train one model per placement and depth");
  RunFlags ablate_flags;
  add_training_flags(ablate, ablate_flags);
  std::string placements = "conv3,conv4,conv5", depths = "1,2", ablate_out;
  ablate->add_option("--placements", placements, "comma list of insertion points")->capture_default_str();
  ablate->add_option("--depths", depths, "comma list of encoder depths")->capture_default_str();
  ablate->add_option("--out", ablate_out, "also write the table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*gen) {
    gen_opt.force = gen_force ? 1 : 0;
    return cmd_gen(gen_out, gen_opt);
  }
  if (*train) return cmd_train(train_flags);
  if (*eval) return cmd_eval(eval_data, eval_ckpt, eval_corrupt, eval_k, eval_report);
  if (*gc) return cmd_gradcheck(gc_op, gc_seed, gc_points, gc_perturb);
  if (*ablate) return cmd_ablate(ablate_flags, placements, depths, ablate_out);
  return 2;
}
