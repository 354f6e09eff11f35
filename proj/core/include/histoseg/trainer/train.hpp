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

#ifndef HISTOSEG_TRAINER_TRAIN_HPP_
#define HISTOSEG_TRAINER_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <string>

#include "histoseg/metrics/metrics.hpp"
#include "histoseg/netgraph/network.hpp"
#include "histoseg/sampler/index.hpp"
#include "histoseg/sampler/patch_sampler.hpp"
#include "histoseg/trainer/folds.hpp"
#include "histoseg/trainer/loss.hpp"
#include "histoseg/trainer/schedule.hpp"

namespace histoseg::trainer {

struct TrainConfig {
  TrainSchedule schedule;
  LossMode loss = LossMode::binary_ce;
  // Master seed. Epoch e draws its batches from an independent generator
  // stream keyed by (seed, e), so resuming at an epoch boundary replays
  // the exact uninterrupted sequence.
  std::uint64_t seed = 1;
  int validate_every = 0;  // epochs between validation passes; 0 = never
  std::uint64_t config_hash = 0;  // embedded in checkpoints
  std::string out_dir;            // gets checkpoints/ and logs/
  bool resume = false;            // continue from checkpoints/last.ckpt
};

/// Runs between epochs on the up-to-date network; typically full-image
/// inference over the held-out fold.
using ValidationFn =
    std::function<metrics::EvaluationReport(netgraph::Network&, int epoch)>;

struct TrainResult {
  int epochs_completed = 0;
  double final_mean_loss = 0.0;
  int best_epoch = -1;       // -1 when never validated
  double best_metric = 0.0;  // headline metric at best_epoch
  std::string last_checkpoint;
  std::string best_checkpoint;  // empty when never validated
  std::string log_path;
};

/// Full training run. fold_plan may be null (train on every indexed
/// image); otherwise validation-fold images are removed from the sampled
/// set and every batch is audited against the plan, a violation being a
/// logic error. Writes one JSON record per epoch to logs/train.jsonl and
/// a checkpoint per epoch to checkpoints/.
TrainResult train(netgraph::Network& net, const sampler::DatasetIndex& index,
                  const FoldPlan* fold_plan,
                  const sampler::SamplerConfig& sampler_config,
                  const TrainConfig& config, ValidationFn validate = {});

/// The sub-index train() actually samples from: entries outside the
/// validation fold. Exposed for audits.
sampler::DatasetIndex training_subset(const sampler::DatasetIndex& index,
                                      const FoldPlan& fold_plan);

}  // namespace histoseg::trainer

#endif  // HISTOSEG_TRAINER_TRAIN_HPP_
