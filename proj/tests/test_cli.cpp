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

// Drives the installed binary end to end and checks exit codes and outputs.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(TROIKIT_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Relative path -> contents for every file under `root`.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("troikit_cli_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    small_args_ = " --per-class 2 --frames 4 --size 16";
    ASSERT_EQ(run("gen --out " + p("tr") + small_args_ + " --seed 3").code, 0);
    ASSERT_EQ(run("gen --out " + p("va") + small_args_ + " --seed 4").code, 0);
    const Result t = run("train --train " + p("tr") + " --val " + p("va") + " --out " + p("m.ckpt") +
                      " --metrics " + p("m.tsv") + " --epochs 2 --batch 4 --channels 8,16,16,16");
    ASSERT_EQ(t.code, 0) << t.out;
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static std::string p(const std::string& name) { return (root_ / name).string(); }

  static fs::path root_;
  static std::string small_args_;
};

fs::path Cli::root_;
std::string Cli::small_args_;

TEST_F(Cli, GenFullDatasetIsDeterministic) {
  const Result a = run("gen --classes 6 --per-class 100 --seed 7 --out " + p("full/nested"));
  ASSERT_EQ(a.code, 0) << a.out;
  const std::string manifest = slurp(root_ / "full/nested/manifest.txt");
  EXPECT_EQ(std::count(manifest.begin(), manifest.end(), '\n'), 600);
  const auto first = snapshot(root_ / "full/nested");
  EXPECT_EQ(run("gen --classes 6 --per-class 100 --seed 7 --out " + p("full/nested")).code, 3);
  ASSERT_EQ(run("gen --classes 6 --per-class 100 --seed 7 --force --out " + p("full/nested")).code, 0);
  EXPECT_TRUE(first == snapshot(root_ / "full/nested"));
  fs::remove_all(root_ / "full");
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("train --train " + p("tr") + " --out " + p("x.ckpt") + " --troi-at conv9").code, 2);
  EXPECT_EQ(run("train --train " + p("tr") + " --out " + p("x.ckpt") + " --wings 2").code, 2);
  EXPECT_EQ(run("gen --out " + p("g") + " --classes 9").code, 2);
  EXPECT_FALSE(fs::exists(root_ / "x.ckpt"));
}

TEST_F(Cli, TrainWritesMetricsLog) {
  const std::string log = slurp(p("m.tsv"));
  EXPECT_EQ(log.rfind("epoch\tlr\ttrain_loss\tval_top1\tval_topk\n", 0), 0u);
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 3);
}

TEST_F(Cli, BaselineTrains) {
  const Result r = run("train --no-troi --train " + p("tr") + " --out " + p("base.ckpt") +
                    " --epochs 1 --batch 4 --channels 8,16,16,16");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(root_ / "base.ckpt"));
}

TEST_F(Cli, ConfigFileWithOverride) {
  std::ofstream(p("run.cfg")) << "train = " << p("tr") << "\nepochs = 5\nbatch = 4\nchannels = 8,16,16,16\n";
  const Result r = run("train --config " + p("run.cfg") + " --epochs 1 --out " + p("cfg.ckpt") + " --metrics " +
                    p("cfg.tsv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string log = slurp(p("cfg.tsv"));
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 2);
  std::ofstream(p("bad.cfg")) << "wings = 2\n";
  EXPECT_EQ(run("train --config " + p("bad.cfg") + " --out " + p("z.ckpt")).code, 2);
  EXPECT_EQ(run("train --config " + p("nope.cfg") + " --out " + p("z.ckpt")).code, 3);
}

TEST_F(Cli, EvalIsRepeatable) {
  const std::string args = "eval --data " + p("va") + " --checkpoint " + p("m.ckpt");
  const Result a = run(args + " --report " + p("r1.txt")), b = run(args + " --report " + p("r2.txt"));
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(p("r1.txt")), slurp(p("r2.txt")));
  EXPECT_NE(a.out.find("top1"), std::string::npos);
  EXPECT_NE(a.out.find("move-away"), std::string::npos);
}

TEST_F(Cli, EvalCorruptions) {
  for (const char* mode : {"iou@0.50", "iou@0.25", "iou@0.05", "drop-hands", "drop-objects", "drop-all"}) {
    const Result r = run("eval --data " + p("va") + " --checkpoint " + p("m.ckpt") + " --corrupt " + mode);
    EXPECT_EQ(r.code, 0) << mode << "\n" << r.out;
  }
  EXPECT_EQ(run("eval --data " + p("va") + " --checkpoint " + p("m.ckpt") + " --corrupt blur").code, 2);
}

TEST_F(Cli, MissingFiles) {
  EXPECT_EQ(run("eval --data " + p("va") + " --checkpoint " + p("absent.ckpt")).code, 3);
  EXPECT_EQ(run("eval --data " + p("absent") + " --checkpoint " + p("m.ckpt")).code, 3);
}

TEST_F(Cli, ResumeExtendsRun) {
  fs::copy_file(p("m.ckpt"), p("res.ckpt"));
  const Result r = run("train --resume --train " + p("tr") + " --out " + p("res.ckpt") +
                    " --epochs 3 --lr-boundaries 1,2 --batch 4 --channels 8,16,16,16");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("epoch   3 "), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("epoch   1 "), std::string::npos) << r.out;
}

TEST_F(Cli, GradcheckSingleOp) {
  const Result r = run("gradcheck --op roi_align");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("roi_align"), std::string::npos);
  EXPECT_EQ(r.out.find("matmul"), std::string::npos);
  EXPECT_EQ(run("gradcheck --op fft").code, 2);
}

TEST_F(Cli, GradcheckNegativeControl) {
  const Result r = run("gradcheck --op roi_align --perturb-grad 0.01");
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST_F(Cli, Ablate) {
  const Result r = run("ablate --train " + p("tr") + " --val " + p("va") +
                    " --epochs 1 --batch 4 --channels 8,16,16,16 --placements conv3,conv4 --depths 1 --out " +
                    p("abl.tsv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string t = slurp(p("abl.tsv"));
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 3);
}

}  // namespace
