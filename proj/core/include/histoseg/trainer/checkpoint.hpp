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

#ifndef HISTOSEG_TRAINER_CHECKPOINT_HPP_
#define HISTOSEG_TRAINER_CHECKPOINT_HPP_

#include <cstdint>
#include <string>

#include "histoseg/netgraph/network.hpp"
#include "histoseg/trainer/nadam.hpp"

namespace histoseg::trainer {

/// Checkpoint metadata. epoch counts completed epochs; master_seed drives
/// the per-epoch sampling streams, so epoch plus seed fully determine the
/// continuation and a resumed run matches an uninterrupted one.
struct CheckpointMeta {
  int epoch = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  std::string metrics_json;  // free-form running metrics record
};

/// Binary parameter snapshot (values and batchnorm running statistics,
/// no gradients) plus optional optimizer state. Native-endian doubles.
void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const netgraph::ParameterStore& params,
                     const Nadam* optimizer);

/// Restores parameters (matched by name, sizes must agree) and, when both
/// sides have it, optimizer state. expected_config_hash of 0 skips the
/// hash check. Returns the stored metadata.
CheckpointMeta load_checkpoint(const std::string& path,
                               netgraph::ParameterStore* params,
                               Nadam* optimizer,
                               std::uint64_t expected_config_hash);

/// Reads only the metadata block.
CheckpointMeta read_checkpoint_meta(const std::string& path);

}  // namespace histoseg::trainer

#endif  // HISTOSEG_TRAINER_CHECKPOINT_HPP_
