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

#ifndef HISTOSEG_NETGRAPH_EXECUTOR_HPP_
#define HISTOSEG_NETGRAPH_EXECUTOR_HPP_

#include <vector>

#include "histoseg/netgraph/network.hpp"
#include "histoseg/tensor.hpp"

namespace histoseg::netgraph {

enum class Mode {
  inference,  // batchnorm uses running statistics; activations freed eagerly
  training,   // batchnorm uses batch statistics; activations kept for backward
};

/// Executes a Network. Owns the per-layer activation workspace so repeated
/// forward/backward passes reuse allocations. One executor serves one
/// thread of control; distinct executors over distinct networks may run
/// concurrently.
class Executor {
 public:
  explicit Executor(Network& net);

  /// Runs the graph. Output channels form a per-pixel probability vector.
  /// Throws std::invalid_argument naming the offending layer on any shape
  /// violation.
  const Tensor& forward(const Tensor& input, Mode mode);

  /// Backpropagates d(loss)/d(output) through the last forward pass
  /// (training mode required) and accumulates parameter gradients.
  void backward(const Tensor& dloss_doutput);

  /// In training mode, folds the current batch statistics into the running
  /// batchnorm state. Call once per optimization step.
  void update_running_stats();

  Network& net() { return *net_; }

 private:
  struct LayerState {
    Tensor out;
    Tensor grad;                // dL/d(out), lazily allocated during backward
    std::vector<double> stats;  // batchnorm: mean|var|inv_std of last batch
    int pending_consumers = 0;
  };

  void run_layer(int idx, Mode mode);
  void backward_layer(int idx);
  Tensor& grad_buffer(int idx);
  void release(int idx);

  Network* net_;
  std::vector<LayerState> states_;
  std::vector<int> consumer_count_;
  Tensor scratch_lin_, scratch_xhat_, scratch_grad_;
  Mode last_mode_ = Mode::inference;
  bool have_forward_ = false;
};

/// Convenience single-shot forward pass.
Tensor forward(Network& net, const Tensor& input, Mode mode = Mode::inference);

}  // namespace histoseg::netgraph

#endif  // HISTOSEG_NETGRAPH_EXECUTOR_HPP_
