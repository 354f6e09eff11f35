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

#ifndef HISTOSEG_TRAINER_LOSS_HPP_
#define HISTOSEG_TRAINER_LOSS_HPP_

#include <string>

#include "histoseg/tensor.hpp"

namespace histoseg::trainer {

/// Cross-entropy against two-channel or four-channel targets. Targets may
/// be soft (vote frequencies); the loss is then the cross-entropy, not a
/// divergence, so its floor is the target's own entropy.
enum class LossMode { binary_ce, categorical_ce };

const char* to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& s);

/// Mean over pixels of -sum_c target_c * log(pred_c), with predictions
/// clamped to [1e-7, 1-1e-7]. Rejects non-finite inputs and shape or
/// channel-count mismatches. If dpred is non-null it receives dloss/dpred
/// (zero where the clamp is active).
double cross_entropy(const Tensor& pred, const Tensor& target, LossMode mode,
                     Tensor* dpred = nullptr);

}  // namespace histoseg::trainer

#endif  // HISTOSEG_TRAINER_LOSS_HPP_
