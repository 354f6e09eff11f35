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

#ifndef HISTOSEG_NETGRAPH_NETWORK_HPP_
#define HISTOSEG_NETGRAPH_NETWORK_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "histoseg/netgraph/config.hpp"
#include "histoseg/rng.hpp"
#include "histoseg/tensor.hpp"

namespace histoseg::netgraph {

enum class LayerKind {
  input,              // the network input placeholder
  input_inject,       // average-pooled copy of the input at a lower scale
  conv3x3_elu,        // 3x3 convolution + activation (optional batchnorm)
  feature_reduction,  // batchnorm + 1x1 convolution + activation
  downsample,         // 2x2 average pooling
  upsample,           // 2x2 transposed convolution, stride 2
  concat,             // channel concatenation of the listed inputs
  head,               // 1x1 convolution + per-pixel softmax
};

const char* to_string(LayerKind k);

enum class Activation { none, elu, relu };

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::input;
  std::vector<int> inputs;  // indices into Network::layers
  int out_channels = 0;
  Activation act = Activation::none;
  bool batch_norm = false;  // batchnorm in front of the convolution
  int factor = 1;           // input_inject: total downscale from full res
};

struct LayerShape {
  int h = 0, w = 0, c = 0;
};

/// One learnable (or running-state) array of the parameter store.
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool learnable = true;

  std::int64_t count() const { return static_cast<std::int64_t>(value.size()); }
};

class ParameterStore {
 public:
  Param& add(const std::string& name, std::vector<int> shape, bool learnable);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool has(const std::string& name) const;

  std::vector<Param>& all() { return params_; }
  const std::vector<Param>& all() const { return params_; }

  std::int64_t learnable_count() const;
  void zero_grads();

 private:
  std::vector<Param> params_;  // creation order, deterministic
  std::map<std::string, int> by_name_;
};

/// A built computation graph: layers in topological order, the parameter
/// store, and per-layer shapes resolved at config.patch_side. Immutable
/// after build except for parameter values.
struct Network {
  NetworkConfig config;
  std::vector<LayerSpec> layers;
  ParameterStore params;
  std::vector<LayerShape> shape_table;
  int input_layer = 0;
  int output_layer = 0;

  int head_channels() const { return config.head_channels(); }
  int downsample_factor() const { return config.downsample_factor(); }
};

/// Builds the requested variant. init_seed drives the variance-scaling
/// weight initialization; the same (config, seed) pair always yields
/// bit-identical parameters.
Network build_network(const NetworkConfig& config, std::uint64_t init_seed = 1);

/// Exact number of learnable scalars (kernels, biases, batchnorm
/// scale/shift). Running batchnorm statistics are state, not parameters.
std::int64_t count_parameters(const Network& net);

/// Human-readable architecture report: one row per layer with inputs,
/// output shape and parameter count, plus the total.
std::string architecture_report(const Network& net);

}  // namespace histoseg::netgraph

#endif  // HISTOSEG_NETGRAPH_NETWORK_HPP_
