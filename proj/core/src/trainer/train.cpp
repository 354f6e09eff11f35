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

#include "histoseg/trainer/train.hpp"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <set>
#include <stdexcept>

#include "histoseg/netgraph/executor.hpp"
#include "histoseg/trainer/checkpoint.hpp"
#include "histoseg/trainer/nadam.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace histoseg::trainer {

namespace {

// Offset separating per-epoch sampling streams from other generator uses.
constexpr std::uint64_t kSampleStreamBase = 0x100;

void stack_batch(const sampler::Batch& batch, int head_channels, Tensor* input,
                 Tensor* target) {
  const int side = batch.patches.at(0).pixels.height;
  const int n = static_cast<int>(batch.patches.size());
  input->resize(n, side, side, 6);
  target->resize(n, side, side, head_channels);
  const std::size_t pixel_count =
      static_cast<std::size_t>(side) * side * 6;
  const std::size_t target_count =
      static_cast<std::size_t>(side) * side * head_channels;
  for (int i = 0; i < n; ++i) {
    const sampler::Patch& p = batch.patches[i];
    if (p.pixels.height != side || p.pixels.width != side)
      throw std::invalid_argument("batch patches disagree on size");
    if (p.target.channels != head_channels)
      throw std::invalid_argument(
          "patch target has " + std::to_string(p.target.channels) +
          " channels but the network head has " +
          std::to_string(head_channels));
    std::memcpy(&input->v[i * pixel_count], p.pixels.pixels.data(),
                pixel_count * sizeof(double));
    std::memcpy(&target->v[i * target_count], p.target.probs.data(),
                target_count * sizeof(double));
  }
}

std::string sizing_report(const netgraph::Network& net) {
  return "out of memory at patch_side=" +
         std::to_string(net.config.patch_side) +
         ", growth_rate=" + std::to_string(net.config.growth_rate) +
         ", batch of 4; patch size trades against network size on fixed "
         "memory, so reduce patch_side (in multiples of " +
         std::to_string(net.downsample_factor()) + ") or growth_rate";
}

}  // namespace

sampler::DatasetIndex training_subset(const sampler::DatasetIndex& index,
                                      const FoldPlan& fold_plan) {
  sampler::DatasetIndex out = index;
  out.entries.clear();
  for (const sampler::IndexEntry& e : index.entries) {
    const auto it = fold_plan.assignments.find(e.image_id);
    if (it == fold_plan.assignments.end())
      throw std::invalid_argument("image '" + e.image_id +
                                  "' is not covered by the fold plan; "
                                  "rebuild folds from this index");
    if (it->second != fold_plan.validation_fold) out.entries.push_back(e);
  }
  return out;
}

TrainResult train(netgraph::Network& net, const sampler::DatasetIndex& index,
                  const FoldPlan* fold_plan,
                  const sampler::SamplerConfig& sampler_config,
                  const TrainConfig& config, ValidationFn validate) {
  config.schedule.validate();
  if (config.out_dir.empty())
    throw std::invalid_argument("training needs an output directory");
  fs::create_directories(fs::path(config.out_dir) / "checkpoints");
  fs::create_directories(fs::path(config.out_dir) / "logs");
  const std::string last_path =
      (fs::path(config.out_dir) / "checkpoints" / "last.ckpt").string();
  const std::string best_path =
      (fs::path(config.out_dir) / "checkpoints" / "best.ckpt").string();
  const std::string log_path =
      (fs::path(config.out_dir) / "logs" / "train.jsonl").string();

  std::set<std::string> validation_ids;
  sampler::DatasetIndex train_index =
      fold_plan ? training_subset(index, *fold_plan) : index;
  if (fold_plan)
    for (const std::string& id : fold_plan->members(fold_plan->validation_fold))
      validation_ids.insert(id);
  if (train_index.entries.empty())
    throw std::invalid_argument("no training images outside the validation "
                                "fold");

  sampler::PatchSampler patch_sampler(train_index, sampler_config);
  netgraph::Executor executor(net);
  Nadam optimizer(net.params);

  TrainResult result;
  result.log_path = log_path;
  result.last_checkpoint = last_path;
  int start_epoch = 0;
  if (config.resume) {
    const CheckpointMeta meta =
        load_checkpoint(last_path, &net.params, &optimizer, config.config_hash);
    if (meta.master_seed != config.seed)
      throw std::runtime_error("checkpoint was trained with seed " +
                               std::to_string(meta.master_seed) +
                               ", not " + std::to_string(config.seed));
    start_epoch = meta.epoch;
    if (!meta.metrics_json.empty()) {
      const json m = json::parse(meta.metrics_json);
      result.best_epoch = m.value("best_epoch", -1);
      result.best_metric = m.value("best_metric", 0.0);
      if (result.best_epoch >= 0) result.best_checkpoint = best_path;
    }
  } else {
    std::ofstream(log_path, std::ios::trunc);  // fresh run, fresh log
  }

  Tensor input, target, dprobs;
  for (int epoch = start_epoch; epoch < config.schedule.epochs; ++epoch) {
    const double lr = learning_rate(epoch, config.schedule);
    const auto epoch_start = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    try {
      Rng epoch_rng(config.seed, kSampleStreamBase + epoch);
      sampler::BatchPrefetcher prefetch(patch_sampler, epoch_rng, 2);
      for (int it = 0; it < config.schedule.iterations_per_epoch; ++it) {
        const sampler::Batch batch = prefetch.next();
        for (const sampler::Patch& p : batch.patches)
          if (validation_ids.count(p.provenance.image_id))
            throw std::logic_error("validation image '" +
                                   p.provenance.image_id +
                                   "' reached training (provenance audit)");
        stack_batch(batch, net.head_channels(), &input, &target);
        const Tensor& probs = executor.forward(input, netgraph::Mode::training);
        loss_sum += cross_entropy(probs, target, config.loss, &dprobs);
        net.params.zero_grads();
        executor.backward(dprobs);
        executor.update_running_stats();
        optimizer.step(lr);
      }
    } catch (const std::bad_alloc&) {
      throw std::runtime_error(sizing_report(net));
    }
    const double mean_loss =
        loss_sum / static_cast<double>(config.schedule.iterations_per_epoch);
    result.final_mean_loss = mean_loss;
    result.epochs_completed = epoch + 1;

    json record;
    record["epoch"] = epoch;
    record["lr"] = lr;
    record["mean_loss"] = mean_loss;
    record["seconds"] = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - epoch_start)
                            .count();
    bool is_best = false;
    if (validate && config.validate_every > 0 &&
        ((epoch + 1) % config.validate_every == 0 ||
         epoch + 1 == config.schedule.epochs)) {
      const metrics::EvaluationReport report = validate(net, epoch);
      const double headline = metrics::headline_metric(report);
      record["validation"] = {{"metric", headline},
                              {"task", metrics::to_string(report.task)}};
      if (result.best_epoch < 0 || headline > result.best_metric) {
        result.best_epoch = epoch;
        result.best_metric = headline;
        result.best_checkpoint = best_path;
        is_best = true;
      }
    }

    CheckpointMeta meta;
    meta.epoch = epoch + 1;
    meta.config_hash = config.config_hash;
    meta.master_seed = config.seed;
    meta.metrics_json = json{{"mean_loss", mean_loss},
                             {"best_epoch", result.best_epoch},
                             {"best_metric", result.best_metric}}
                            .dump();
    save_checkpoint(last_path, meta, net.params, &optimizer);
    if (is_best) save_checkpoint(best_path, meta, net.params, &optimizer);

    std::ofstream log(log_path, std::ios::app);
    log << record.dump() << "\n";
  }
  return result;
}

}  // namespace histoseg::trainer
