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

#ifndef HISTOSEG_EXPERIMENT_HPP_
#define HISTOSEG_EXPERIMENT_HPP_

#include <cstdint>
#include <string>

#include "histoseg/infer/stitch.hpp"
#include "histoseg/metrics/metrics.hpp"
#include "histoseg/netgraph/config.hpp"
#include "histoseg/preprocess/tissue.hpp"
#include "histoseg/sampler/index.hpp"
#include "histoseg/sampler/patch_sampler.hpp"
#include "histoseg/trainer/schedule.hpp"
#include "histoseg/trainer/train.hpp"

namespace histoseg {

/// One experiment = one JSON document. Every derived artifact embeds or
/// sits beside the hash of the canonicalized document, so runs stay
/// diffable and mixing artifacts across configurations is detectable.
struct ExperimentConfig {
  metrics::Task task = metrics::Task::digestpath;
  std::string dataset_root;
  std::string output_dir;

  netgraph::NetworkConfig network;
  trainer::TrainSchedule schedule;

  sampler::LabelSource label_source = sampler::LabelSource::majority_vote;
  std::string annotator_id;  // single_annotator mode only

  std::uint64_t train_seed = 1;
  int validate_every = 25;

  struct Folds {
    int k = 10;
    std::uint64_t seed = 7;
    int validation_fold = 0;
  } folds;

  struct Index {
    int center_cap = 20000;
    std::uint64_t seed = 1;
  } index;

  preprocess::MaskConfig mask;

  struct Infer {
    int overlap = 192;  // tile_side / 4 at the default patch size
    infer::WindowKind window = infer::WindowKind::cosine_ramp;
  } infer;

  int sampler_cache_images = 8;

  /// Parses and structurally validates. Errors carry the offending field
  /// path (for example "schedule.lr_decay"). The HISTOSEG_DATA_ROOT
  /// environment variable, when set, overrides dataset_root.
  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text,
                                         const std::string& origin);

  /// Canonical form: sorted keys, fixed layout. Hash input and the format
  /// written into experiment directories.
  std::string canonical_document() const;
  std::uint64_t hash() const;

  /// Field consistency (task vs head channels, mode vs annotator id...).
  void validate() const;
  /// Existence of dataset_root; call before commands that read data.
  void validate_paths() const;

  trainer::LossMode loss_mode() const;
  sampler::IndexConfig index_config() const;
  sampler::SamplerConfig sampler_config() const;
  trainer::TrainConfig train_config() const;
};

/// Creates output_dir with config/, checkpoints/, predictions/, reports/
/// and logs/, writes the canonical document and its hash under config/,
/// and refuses an existing directory holding a different hash.
void prepare_experiment_dir(const ExperimentConfig& config);

}  // namespace histoseg

#endif  // HISTOSEG_EXPERIMENT_HPP_
