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

#ifndef HISTOSEG_TRAINER_SCHEDULE_HPP_
#define HISTOSEG_TRAINER_SCHEDULE_HPP_

#include <cmath>
#include <stdexcept>

namespace histoseg::trainer {

/// Exponential learning-rate decay with a fixed epoch budget and no early
/// stopping. Defaults fit the two-class task; the grading task uses 250
/// iterations over 400 epochs.
struct TrainSchedule {
  double initial_lr = 0.001;
  double lr_decay = 0.99;
  int iterations_per_epoch = 400;
  int epochs = 250;

  void validate() const {
    if (initial_lr <= 0.0)
      throw std::invalid_argument("initial_lr must be positive");
    if (lr_decay <= 0.0 || lr_decay > 1.0)
      throw std::invalid_argument("lr_decay must lie in (0,1]");
    if (iterations_per_epoch <= 0)
      throw std::invalid_argument("iterations_per_epoch must be positive");
    if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
  }
};

inline double learning_rate(int epoch, const TrainSchedule& sched) {
  if (epoch < 0) throw std::invalid_argument("epoch must be non-negative");
  return sched.initial_lr * std::pow(sched.lr_decay, epoch);
}

}  // namespace histoseg::trainer

#endif  // HISTOSEG_TRAINER_SCHEDULE_HPP_
