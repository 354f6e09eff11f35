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

#ifndef HISTOSEG_TRAINER_NADAM_HPP_
#define HISTOSEG_TRAINER_NADAM_HPP_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "histoseg/netgraph/network.hpp"

namespace histoseg::trainer {

struct NadamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with Nesterov momentum. Moment estimates use the momentum warmup
/// mu_t = beta1 * (1 - 0.5 * 0.96^(t/250)) and the running product of the
/// mu's for bias correction, so the lookahead term is consistent step to
/// step.
class Nadam {
 public:
  explicit Nadam(netgraph::ParameterStore& store, NadamConfig config = {});

  /// Applies one update from the gradients currently held in the store.
  /// A non-finite gradient refuses the whole step (no state changes) and
  /// throws std::runtime_error naming the parameter.
  void step(double lr);

  std::int64_t steps() const { return t_; }
  const NadamConfig& config() const { return config_; }

  /// Binary state round-trip for checkpointing. The store layout must
  /// match on restore; mismatches throw.
  void serialize(std::ostream& out) const;
  void deserialize(std::istream& in);

 private:
  netgraph::ParameterStore* store_;
  NadamConfig config_;
  std::int64_t t_ = 0;
  double mu_product_ = 1.0;
  std::vector<std::vector<double>> m_, v_;  // per learnable param, in order
};

}  // namespace histoseg::trainer

#endif  // HISTOSEG_TRAINER_NADAM_HPP_
