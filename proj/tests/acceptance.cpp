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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion, plus
// indented detail lines, and exits nonzero if any criterion fails.
//
//   acceptance            run everything
//   acceptance 2 3 8      run a subset

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "test_util.hpp"
#include "troikit/gradcheck.hpp"
#include "troikit/trainer.hpp"

namespace troikit {
namespace {

using testing::random_box;
using testing::random_tensor;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void verdict(int id, bool ok, const std::string& what) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
}

void detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void detail(const char* fmt, ...) {
  std::fputs("    ", stdout);
  va_list ap;
  va_start(ap, fmt);
  std::vprintf(fmt, ap);
  va_end(ap);
  std::fputc('\n', stdout);
  std::fflush(stdout);
}

bool criterion_gradients() {
  const auto t0 = Clock::now();
  GradcheckOptions o;
  o.points = 10;
  const auto rows = gradcheck_all(o);
  const double elapsed = seconds_since(t0);
  bool ok = rows.size() == 10;
  double worst = 0.0;
  for (const auto& r : rows) {
    ok = ok && r.passed && r.max_rel_error < 1e-4 && r.points == 10;
    worst = std::max(worst, r.max_rel_error);
    detail("%-14s max rel err %.3e %s", r.op.c_str(), r.max_rel_error, r.passed ? "ok" : "FAILED");
  }
  ok = ok && elapsed < 60.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "gradient suite, %zu ops, worst rel err %.2e, %.1f s", rows.size(), worst, elapsed);
  verdict(1, ok, buf);
  return ok;
}

bool criterion_attention_rows() {
  PrecisionScope f64(Precision::kFloat64);
  Rng rng(mix_seed(2026, 2));
  const std::size_t widths[] = {8, 16, 32};
  double worst = 0.0;
  std::size_t rows = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(1, 16));
    const std::size_t c = widths[rep % 3];
    const std::size_t heads = (rep / 3) % 2 ? 4 : 2;
    std::vector<EncoderLayerParams> layers = {init_encoder_layer(c, heads, rng), init_encoder_layer(c, heads, rng)};
    std::vector<Tensor> maps;
    encode(random_tensor({n, c}, rng, -3, 3), layers, &maps);
    for (const Tensor& a : maps)
      for (std::size_t i = 0; i < a.dim(0); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.dim(1); ++j) s += a.at({i, j});
        worst = std::max(worst, std::abs(s - 1.0));
        ++rows;
      }
  }
  const bool ok = worst <= 1e-6;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "attention rows sum to 1, %zu rows, worst |sum-1| %.2e", rows, worst);
  verdict(2, ok, buf);
  return ok;
}

bool criterion_locality() {
  Rng rng(mix_seed(2026, 3));
  TroiConfig cfg;
  cfg.scene_token = true;
  const TroiParams params = init_troi(cfg, 16, rng);
  std::size_t outside = 0, violations = 0, bypass_bad = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t t = static_cast<std::size_t>(rng.integer(1, 4));
    const std::size_t w = static_cast<std::size_t>(rng.integer(3, 8));
    const Tensor x = random_tensor({t, w, w, 16}, rng);
    std::vector<RoiBox> rois;
    for (int i = 0, n = rng.integer(1, 6); i < n; ++i) rois.push_back(random_box(rng, t, 0.02));
    TroiTrace trace;
    const Tensor y = troi_forward(x, rois, params, cfg, &trace);
    for (std::size_t f = 0; f < t; ++f)
      for (std::size_t i = 0; i < w; ++i)
        for (std::size_t j = 0; j < w; ++j) {
          bool in = false;
          for (const auto& fp : trace.footprints)
            in |= fp.frame == f && i >= fp.x_first && i <= fp.x_last && j >= fp.y_first && j <= fp.y_last;
          if (in) continue;
          for (std::size_t c = 0; c < 16; ++c) {
            ++outside;
            violations += y.at({f, i, j, c}) != x.at({f, i, j, c});
          }
        }
    const Tensor z = troi_forward(x, {}, params, cfg);
    for (std::size_t k = 0; k < x.numel(); ++k) bypass_bad += z.data()[k] != x.data()[k];
  }
  const bool ok = violations == 0 && bypass_bad == 0 && outside > 0;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "locality and bypass, %zu outside values checked, %zu changed, %zu bypass diffs",
                outside, violations, bypass_bad);
  verdict(3, ok, buf);
  return ok;
}

bool criterion_oracles() {
  PrecisionScope f64(Precision::kFloat64);
  Rng rng(mix_seed(2026, 4));
  double mha_worst = 0.0, align_worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t c = rep % 2 ? 16 : 32;
    const std::size_t heads = rep % 4 < 2 ? 2 : 4;
    const EncoderLayerParams p = init_encoder_layer(c, heads, rng);
    const Tensor f = random_tensor({static_cast<std::size_t>(rng.integer(1, 16)), c}, rng);
    const Tensor got = multi_head(f, p);
    const auto want = testing::brute_mha(testing::to_mat(f), p);
    for (std::size_t i = 0; i < want.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) mha_worst = std::max(mha_worst, std::abs(got.at({i, j}) - want[i][j]));
  }
  for (int rep = 0; rep < 50; ++rep) {
    const Tensor m = random_tensor({static_cast<std::size_t>(rng.integer(2, 14)),
                                    static_cast<std::size_t>(rng.integer(2, 14)), 4},
                                   rng);
    const RoiBox b = random_box(rng, 1, 0.01);
    const std::size_t out = static_cast<std::size_t>(rng.integer(1, 4));
    const Tensor got = roi_align(m, b, out);
    const auto want = testing::brute_align(m, b, out);
    for (std::size_t k = 0; k < want.size(); ++k) align_worst = std::max(align_worst, std::abs(got.data()[k] - want[k]));
  }
  const bool ok = mha_worst <= 1e-6 && align_worst <= 1e-9;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "oracle equivalence, MHA worst %.2e (tol 1e-6), RoIAlign worst %.2e (tol 1e-9)",
                mha_worst, align_worst);
  verdict(4, ok, buf);
  return ok;
}

// Shared by criteria 5, 6 and 7.
struct Data {
  Dataset train, val;
};

Data relational_data() {
  DatasetSpec tr;
  tr.per_class = 100;
  tr.seed = 7;
  DatasetSpec va;
  va.per_class = 50;
  va.seed = 1007;
  return {build_dataset(tr), build_dataset(va)};
}

struct SeedResult {
  double troi = 0.0, base = 0.0;
  double iou50 = 0.0, iou25 = 0.0, iou05 = 0.0, drop_all = 0.0;
};

const std::uint64_t kSeeds[] = {1, 2, 3};

std::vector<SeedResult> relational_runs(const Data& d) {
  std::vector<SeedResult> out;
  TrainConfig tc;  // 30 epochs, batch 16, lr 0.01, drops at 10 and 20
  for (std::uint64_t seed : kSeeds) {
    SeedResult r;
    for (bool troi : {true, false}) {
      const auto t0 = Clock::now();
      ModelConfig mc;
      mc.troi_enabled = troi;
      Model m = Model::create(mc, seed);
      tc.seed = seed;
      CheckpointState st;
      train(m, d.train, d.val, tc, st);
      const double acc = evaluate(m, d.val, 5).top1;
      detail("seed %llu %-8s top1 %.4f  (%.0f s)", static_cast<unsigned long long>(seed), troi ? "troi" : "baseline",
             acc, seconds_since(t0));
      if (troi) {
        r.troi = acc;
        r.iou50 = evaluate(m, d.val, 5, Corruption::parse("iou@0.50")).top1;
        r.iou25 = evaluate(m, d.val, 5, Corruption::parse("iou@0.25")).top1;
        r.iou05 = evaluate(m, d.val, 5, Corruption::parse("iou@0.05")).top1;
        r.drop_all = evaluate(m, d.val, 5, Corruption::parse("drop-all")).top1;
        detail("seed %llu corruption  iou@0.50 %.4f  iou@0.25 %.4f  iou@0.05 %.4f  drop-all %.4f",
               static_cast<unsigned long long>(seed), r.iou50, r.iou25, r.iou05, r.drop_all);
      } else {
        r.base = acc;
      }
    }
    out.push_back(r);
  }
  return out;
}

SeedResult average(const std::vector<SeedResult>& rs) {
  SeedResult a;
  for (const auto& r : rs) {
    a.troi += r.troi;
    a.base += r.base;
    a.iou50 += r.iou50;
    a.iou25 += r.iou25;
    a.iou05 += r.iou05;
    a.drop_all += r.drop_all;
  }
  const double n = static_cast<double>(rs.size());
  for (double* v : {&a.troi, &a.base, &a.iou50, &a.iou25, &a.iou05, &a.drop_all}) *v /= n;
  return a;
}

bool criterion_relational_gain(const SeedResult& avg, double elapsed) {
  const double gap = 100.0 * (avg.troi - avg.base);
  const bool ok = gap >= 10.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "relational gain, TROI %.2f%% vs baseline %.2f%%, gap %.2f points (need >= 10), %.0f s",
                100 * avg.troi, 100 * avg.base, gap, elapsed);
  verdict(5, ok, buf);
  return ok;
}

bool criterion_corruption(const SeedResult& avg) {
  const bool ok = avg.iou50 >= avg.iou25 && avg.iou25 >= avg.iou05 && avg.drop_all < avg.troi;
  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "corruption trend, GT %.4f  iou@0.50 %.4f  iou@0.25 %.4f  iou@0.05 %.4f  drop-all %.4f", avg.troi,
                avg.iou50, avg.iou25, avg.iou05, avg.drop_all);
  verdict(6, ok, buf);
  return ok;
}

bool criterion_ablation(const Data& d) {
  const auto t0 = Clock::now();
  TrainConfig tc;
  tc.epochs = 3;
  const auto rows = run_ablation(ModelConfig{}, d.train, d.val, tc,
                                 {InsertionPoint::kConv3, InsertionPoint::kConv4, InsertionPoint::kConv5}, {1, 2});
  const std::string table = format_ablation(rows);
  std::istringstream is(table);
  for (std::string line; std::getline(is, line);) detail("%s", line.c_str());
  bool ok = rows.size() == 6;
  for (const auto& r : rows) ok = ok && std::isfinite(r.final_loss) && r.val.count == d.val.size();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "ablation harness, %zu placement x depth runs, table emitted, %.0f s", rows.size(),
                seconds_since(t0));
  verdict(7, ok, buf);
  return ok;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool criterion_determinism() {
  const auto t0 = Clock::now();
  testing::TempDir dir("accept_det_" + std::to_string(::getpid()));
  DatasetSpec tr;
  tr.per_class = 10;
  tr.seed = 21;
  DatasetSpec va;
  va.per_class = 5;
  va.seed = 22;
  const Dataset train_set = build_dataset(tr), val_set = build_dataset(va);
  TrainConfig tc;
  tc.epochs = 3;
  tc.precision = Precision::kFloat64;
  tc.seed = 5;
  std::vector<std::string> logs;
  for (const char* name : {"a.tsv", "b.tsv"}) {
    Model m = Model::create(ModelConfig{}, 5);
    CheckpointState st;
    TrainHooks h;
    h.metrics_path = dir.str() + "/" + name;
    train(m, train_set, val_set, tc, st, h);
    logs.push_back(slurp(h.metrics_path));
  }
  const bool ok = logs[0] == logs[1] && !logs[0].empty();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "determinism, two 64-bit runs give %s metrics logs (%zu bytes), %.0f s",
                ok ? "byte-identical" : "DIFFERENT", logs[0].size(), seconds_since(t0));
  verdict(8, ok, buf);
  return ok;
}

}  // namespace
}  // namespace troikit

int main(int argc, char** argv) {
  using namespace troikit;
  std::set<int> want;
  for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));
  auto on = [&](int id) { return want.empty() || want.count(id) > 0; };

  bool ok = true;
  try {
    if (on(1)) ok &= criterion_gradients();
    if (on(2)) ok &= criterion_attention_rows();
    if (on(3)) ok &= criterion_locality();
    if (on(4)) ok &= criterion_oracles();
    if (on(5) || on(6) || on(7)) {
      const Data d = relational_data();
      if (on(5) || on(6)) {
        const auto t0 = Clock::now();
        const SeedResult avg = average(relational_runs(d));
        const double elapsed = seconds_since(t0);
        if (on(5)) ok &= criterion_relational_gain(avg, elapsed);
        if (on(6)) ok &= criterion_corruption(avg);
      }
      if (on(7)) ok &= criterion_ablation(d);
    }
    if (on(8)) ok &= criterion_determinism();
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }
  return ok ? 0 : 1;
}
