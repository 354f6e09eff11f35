// Copyright 2026 The Histoseg Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end runs of the installed binary. HISTOSEG_CLI_PATH points at
// the freshly built executable (a CMake compile definition).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "histoseg/io/image_io.hpp"
#include "histoseg/labels/labels.hpp"
#include "histoseg/preprocess/tissue.hpp"
#include "support/synth.hpp"
#include "support/testenv.hpp"

namespace fs = std::filesystem;
using histoseg::testing::TempDir;
using histoseg::testing::read_file;
using histoseg::testing::write_file;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args, const TempDir& scratch) {
  static int counter = 0;
  const std::string log = scratch.sub("cli_" + std::to_string(counter++) +
                                      ".log");
  const std::string cmd =
      std::string(HISTOSEG_CLI_PATH) + " " + args + " >" + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = read_file(log);
  return r;
}

// A complete small experiment: tiny network, few epochs, 64 px images.
std::string write_config(const TempDir& tmp, const std::string& data_root,
                         const std::string& out_dir, int train_seed = 5,
                         const std::string& name = "experiment.json") {
  const std::string doc = std::string(R"({
  "task": "digestpath",
  "dataset_root": ")") + data_root + R"(",
  "output_dir": ")" + out_dir + R"(",
  "network": {"growth_rate": 2, "encoder_blocks": [1, 1], "patch_side": 32},
  "schedule": {"initial_lr": 0.001, "lr_decay": 0.99,
               "iterations_per_epoch": 2, "epochs": 2},
  "train_seed": )" + std::to_string(train_seed) + R"(,
  "validate_every": 0,
  "folds": {"k": 3, "seed": 2, "validation_fold": 0},
  "index": {"center_cap": 500, "seed": 1},
  "infer": {"overlap": 8, "window": "cosine_ramp"}
})";
  const std::string path = tmp.sub(name);
  write_file(path, doc);
  return path;
}

}  // namespace

TEST_CASE("the binary prints help and rejects unknown subcommands") {
  TempDir tmp("cli_help");
  const RunResult help = run_cli("--help", tmp);
  CHECK(help.exit_code == 0);
  for (const char* sub : {"index", "mask", "fuse-labels", "folds", "train",
                          "predict", "evaluate", "report", "gradcheck"})
    CHECK(help.output.find(sub) != std::string::npos);

  CHECK(run_cli("frobnicate", tmp).exit_code != 0);
  CHECK(run_cli("train", tmp).exit_code != 0);  // missing --config
}

TEST_CASE("gradient check passes on the self-test network") {
  TempDir tmp("cli_grad");
  const RunResult r = run_cli("gradcheck --probes 10", tmp);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("PASS") != std::string::npos);
}

TEST_CASE("mask extraction writes a tissue mask image") {
  TempDir tmp("cli_mask");
  histoseg::RgbImage img =
      histoseg::testing::flat_image(64, 64, histoseg::testing::kWhiteSlide, 3);
  histoseg::testing::paint_disk(img, 32, 32, 20,
                                histoseg::testing::kPinkTissue);
  histoseg::io::save_rgb(tmp.sub("slide.png"), img);

  const RunResult r = run_cli(
      "mask --image " + tmp.sub("slide.png") + " --out " + tmp.sub("mask.png"),
      tmp);
  CHECK(r.exit_code == 0);
  const histoseg::TissueMask mask = histoseg::io::load_mask(tmp.sub("mask.png"));
  CHECK(mask.at(32, 32));
  CHECK_FALSE(mask.at(2, 2));
}

TEST_CASE("label fusion merges annotators through the tissue gate") {
  TempDir tmp("cli_fuse");
  using histoseg::labels::ClassSpace;
  using histoseg::labels::GradeMap;

  GradeMap a(16, 16, ClassSpace::gleason_raw), b = a, c = a;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 8; ++x) {
      a.set(y, x, 3);
      b.set(y, x, 3);
      c.set(y, x, 4);
    }
  histoseg::io::save_grade_map(tmp.sub("a.png"), a);
  histoseg::io::save_grade_map(tmp.sub("b.png"), b);
  histoseg::io::save_grade_map(tmp.sub("c.png"), c);
  histoseg::TissueMask mask(16, 16);
  mask.mask.assign(mask.mask.size(), 1);
  histoseg::io::save_mask(tmp.sub("mask.png"), mask);

  const RunResult r = run_cli(
      "fuse-labels --inputs " + tmp.sub("a.png") + " " + tmp.sub("b.png") +
          " " + tmp.sub("c.png") + " --mask " + tmp.sub("mask.png") +
          " --mode majority --out " + tmp.sub("fused.png"),
      tmp);
  CHECK(r.exit_code == 0);
  const GradeMap fused = histoseg::io::load_grade_map(
      tmp.sub("fused.png"), ClassSpace::gleason_merged);
  CHECK(fused.at(4, 4) == 1);   // grade 3 wins 2:1, merged class 1
  CHECK(fused.at(4, 12) == 0);  // unanimous background
}

TEST_CASE("index, folds, train, predict, evaluate, and report chain up") {
  TempDir data("cli_data"), tmp("cli_run");
  histoseg::testing::DigestpathSpec spec;
  spec.positive_images = 6;
  spec.negative_images = 3;
  spec.side = 64;
  histoseg::testing::make_digestpath_dataset(data.str(), spec);
  const std::string out_dir = tmp.sub("out");
  const std::string cfg = write_config(tmp, data.str(), out_dir);

  const RunResult r_index = run_cli("index --config " + cfg, tmp);
  CHECK(r_index.exit_code == 0);
  CHECK(fs::exists(fs::path(data.str()) / "histoseg-index.json"));

  const RunResult r_folds = run_cli("folds --config " + cfg, tmp);
  CHECK(r_folds.exit_code == 0);
  CHECK(fs::exists(fs::path(out_dir) / "config" / "folds.json"));

  const RunResult r_train = run_cli("train --config " + cfg, tmp);
  CHECK(r_train.exit_code == 0);
  CHECK(fs::exists(fs::path(out_dir) / "checkpoints" / "last.ckpt"));
  CHECK(fs::exists(fs::path(out_dir) / "logs" / "train.jsonl"));

  const RunResult r_pred = run_cli("predict --config " + cfg, tmp);
  CHECK(r_pred.exit_code == 0);
  int predicted = 0;
  for (const auto& entry :
       fs::directory_iterator(fs::path(out_dir) / "predictions")) {
    if (!entry.is_directory()) continue;
    ++predicted;
    CHECK(fs::exists(entry.path() / "class_map.png"));
    CHECK(fs::exists(entry.path() / "prob_class1.png"));
    CHECK(fs::exists(entry.path() / "overlay.png"));
    CHECK(fs::exists(entry.path() / "meta.json"));
  }
  CHECK(predicted == 3);  // 9 images, 3 folds, validation fold 0

  const RunResult r_eval = run_cli("evaluate --config " + cfg, tmp);
  CHECK(r_eval.exit_code == 0);
  const std::string eval_json =
      read_file(out_dir + "/reports/evaluation_fold0.json");
  CHECK(eval_json.find("dice_pooled") != std::string::npos);

  const RunResult r_report = run_cli("report --config " + cfg, tmp);
  CHECK(r_report.exit_code == 0);
  const std::string summary = read_file(out_dir + "/reports/summary.txt");
  CHECK(summary.find("dice") != std::string::npos);
  CHECK(summary.find("PARTIAL REPORT") != std::string::npos);  // 1 of 3 folds
  CHECK(fs::exists(fs::path(out_dir) / "reports" / "summary.csv"));
  CHECK(fs::exists(fs::path(out_dir) / "reports" / "training_curves.svg"));
  CHECK(fs::exists(fs::path(out_dir) / "reports" / "architecture.txt"));
}

TEST_CASE("evaluation refuses predictions from another configuration") {
  TempDir data("cli_mix_data"), tmp("cli_mix");
  histoseg::testing::DigestpathSpec spec;
  spec.positive_images = 4;
  spec.negative_images = 2;
  spec.side = 64;
  histoseg::testing::make_digestpath_dataset(data.str(), spec);

  const std::string out_a = tmp.sub("run_a");
  const std::string cfg_a = write_config(tmp, data.str(), out_a, 5, "a.json");

  CHECK(run_cli("train --config " + cfg_a, tmp).exit_code == 0);
  CHECK(run_cli("predict --config " + cfg_a, tmp).exit_code == 0);

  // Same output tree, different seed: the stored hash no longer matches.
  const std::string cfg_b = write_config(tmp, data.str(), out_a, 6, "b.json");
  const RunResult r = run_cli("evaluate --config " + cfg_b, tmp);
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("refusing") != std::string::npos);
}
