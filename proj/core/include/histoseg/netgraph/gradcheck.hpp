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

#ifndef HISTOSEG_NETGRAPH_GRADCHECK_HPP_
#define HISTOSEG_NETGRAPH_GRADCHECK_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "histoseg/netgraph/network.hpp"

namespace histoseg::netgraph {

struct GradCheckOptions {
  int probe_count = 50;
  double step = 1e-5;
  int batch = 1;
  int side = 16;              // spatial size of the probe input
  std::uint64_t seed = 7;
  // Gradients whose analytic and numeric magnitudes both fall below this
  // are compared by absolute instead of relative error.
  double zero_grad_threshold = 1e-6;
};

struct GradProbe {
  std::string param;
  int element = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double error = 0.0;  // relative, or absolute on a dead path
  bool relative = true;
};

struct GradCheckResult {
  double max_error = 0.0;
  std::vector<GradProbe> probes;
};

/// Compares the analytic loss gradient of a freshly built micro network
/// (< 10k parameters enforced) against central finite differences at
/// randomly probed parameters. The objective is mean cross-entropy against
/// a fixed random target. Throws std::runtime_error naming the parameter
/// index if the loss turns non-finite.
GradCheckResult gradient_check(const NetworkConfig& config,
                               const GradCheckOptions& opts = {});

/// Probe an already-built network (lets tests pin weights first).
GradCheckResult gradient_check(Network& net, const GradCheckOptions& opts = {});

}  // namespace histoseg::netgraph

#endif  // HISTOSEG_NETGRAPH_GRADCHECK_HPP_
