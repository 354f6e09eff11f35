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

#include "histoseg/netgraph/network.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace histoseg::netgraph {

const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::input: return "input";
    case LayerKind::input_inject: return "input_inject";
    case LayerKind::conv3x3_elu: return "conv3x3_elu";
    case LayerKind::feature_reduction: return "feature_reduction";
    case LayerKind::downsample: return "downsample";
    case LayerKind::upsample: return "upsample";
    case LayerKind::concat: return "concat";
    case LayerKind::head: return "head";
  }
  return "?";
}

Param& ParameterStore::add(const std::string& name, std::vector<int> shape,
                           bool learnable) {
  if (by_name_.count(name))
    throw std::invalid_argument("duplicate parameter name: " + name);
  std::size_t total = 1;
  for (int d : shape) total *= static_cast<std::size_t>(d);
  Param p;
  p.name = name;
  p.shape = std::move(shape);
  p.value.assign(total, 0.0);
  p.grad.assign(total, 0.0);
  p.learnable = learnable;
  by_name_[name] = static_cast<int>(params_.size());
  params_.push_back(std::move(p));
  return params_.back();
}

Param& ParameterStore::get(const std::string& name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end())
    throw std::invalid_argument("no such parameter: " + name);
  return params_[it->second];
}

const Param& ParameterStore::get(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end())
    throw std::invalid_argument("no such parameter: " + name);
  return params_[it->second];
}

bool ParameterStore::has(const std::string& name) const {
  return by_name_.count(name) != 0;
}

std::int64_t ParameterStore::learnable_count() const {
  std::int64_t total = 0;
  for (const auto& p : params_)
    if (p.learnable) total += p.count();
  return total;
}

void ParameterStore::zero_grads() {
  for (auto& p : params_)
    std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

namespace {

// Incremental graph builder: tracks per-layer shapes and initializes
// parameters in creation order so a (config, seed) pair is reproducible.
class GraphBuilder {
 public:
  GraphBuilder(Network& net, std::uint64_t seed) : net_(net), rng_(seed) {}

  int add_input(int channels, int side) {
    LayerSpec s;
    s.name = "input";
    s.kind = LayerKind::input;
    s.out_channels = channels;
    return push(s, {side, side, channels});
  }

  int add_inject(const std::string& name, int input, int factor) {
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::input_inject;
    s.inputs = {input};
    s.factor = factor;
    const LayerShape in = shape(input);
    s.out_channels = in.c;
    return push(s, {in.h / factor, in.w / factor, in.c});
  }

  int add_conv3x3(const std::string& name, int input, int out_ch,
                  Activation act, bool bn) {
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::conv3x3_elu;
    s.inputs = {input};
    s.out_channels = out_ch;
    s.act = act;
    s.batch_norm = bn;
    const LayerShape in = shape(input);
    int idx = push(s, {in.h, in.w, out_ch});
    if (bn) add_bn_params(name, in.c);
    add_conv_params(name, 3, in.c, out_ch);
    return idx;
  }

  int add_reduction(const std::string& name, int input, int out_ch,
                    Activation act, bool bn) {
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::feature_reduction;
    s.inputs = {input};
    s.out_channels = out_ch;
    s.act = act;
    s.batch_norm = bn;
    const LayerShape in = shape(input);
    int idx = push(s, {in.h, in.w, out_ch});
    if (bn) add_bn_params(name, in.c);
    add_conv_params(name, 1, in.c, out_ch);
    return idx;
  }

  int add_pool(const std::string& name, int input) {
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::downsample;
    s.inputs = {input};
    const LayerShape in = shape(input);
    s.out_channels = in.c;
    return push(s, {in.h / 2, in.w / 2, in.c});
  }

  int add_tconv(const std::string& name, int input, int out_ch) {
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::upsample;
    s.inputs = {input};
    s.out_channels = out_ch;
    const LayerShape in = shape(input);
    int idx = push(s, {in.h * 2, in.w * 2, out_ch});
    // kernel layout (cin, ky, kx, cout); each output pixel sees one tap
    Param& w = net_.params.add(name + "/w", {in.c, 2, 2, out_ch}, true);
    init_normal(w, std::sqrt(2.0 / in.c));
    net_.params.add(name + "/b", {out_ch}, true);
    return idx;
  }

  int add_concat(const std::string& name, std::vector<int> inputs) {
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::concat;
    s.inputs = std::move(inputs);
    const LayerShape first = shape(s.inputs[0]);
    int ch = 0;
    for (int i : s.inputs) {
      const LayerShape& sh = shape(i);
      if (sh.h != first.h || sh.w != first.w)
        throw std::invalid_argument("concat '" + name +
                                    "': spatial sizes differ");
      ch += sh.c;
    }
    s.out_channels = ch;
    return push(s, {first.h, first.w, ch});
  }

  int add_head(const std::string& name, int input, int out_ch) {
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::head;
    s.inputs = {input};
    s.out_channels = out_ch;
    const LayerShape in = shape(input);
    int idx = push(s, {in.h, in.w, out_ch});
    add_conv_params(name, 1, in.c, out_ch);
    return idx;
  }

  const LayerShape& shape(int idx) const { return net_.shape_table[idx]; }
  int channels(int idx) const { return net_.shape_table[idx].c; }

 private:
  int push(const LayerSpec& s, LayerShape sh) {
    net_.layers.push_back(s);
    net_.shape_table.push_back(sh);
    return static_cast<int>(net_.layers.size()) - 1;
  }

  void add_conv_params(const std::string& name, int k, int cin, int cout) {
    Param& w = net_.params.add(name + "/w", {k, k, cin, cout}, true);
    init_normal(w, std::sqrt(2.0 / (k * k * cin)));
    net_.params.add(name + "/b", {cout}, true);
  }

  void add_bn_params(const std::string& name, int c) {
    Param& g = net_.params.add(name + "/bn_gamma", {c}, true);
    std::fill(g.value.begin(), g.value.end(), 1.0);
    net_.params.add(name + "/bn_beta", {c}, true);
    net_.params.add(name + "/bn_mean", {c}, false);
    Param& v = net_.params.add(name + "/bn_var", {c}, false);
    std::fill(v.value.begin(), v.value.end(), 1.0);
  }

  void init_normal(Param& p, double stddev) {
    for (double& x : p.value) x = rng_.normal() * stddev;
  }

  Network& net_;
  Rng rng_;
};

// Dense block of feature-reduction + 3x3 conv units with running
// concatenation. Returns the final concat node. `plain` drops the
// reduction layers (the full-resolution first block, tiramisu blocks).
struct DenseBlockResult {
  int output = -1;     // concatenation of block input and all conv outputs
  int last_conv = -1;  // newest growth_rate-wide feature map
};

DenseBlockResult dense_block(GraphBuilder& gb, const NetworkConfig& cfg,
                             const std::string& prefix, int block_input,
                             int n_convs, bool plain, Activation act,
                             bool bn_per_conv) {
  int running = block_input;
  int last_conv = -1;
  for (int k = 1; k <= n_convs; ++k) {
    int conv_in = running;
    if (!plain) {
      conv_in = gb.add_reduction(
          prefix + "/cb" + std::to_string(k) + "/reduce", running,
          cfg.reduction_width_multiplier * cfg.growth_rate, act, true);
    }
    std::string conv_name =
        plain ? prefix + "/conv" + std::to_string(k)
              : prefix + "/cb" + std::to_string(k) + "/conv";
    last_conv =
        gb.add_conv3x3(conv_name, conv_in, cfg.growth_rate, act, bn_per_conv);
    running = gb.add_concat(prefix + "/cat" + std::to_string(k),
                            {running, last_conv});
  }
  return {running, last_conv};
}

void build_one_bn(Network& net, GraphBuilder& gb) {
  const NetworkConfig& cfg = net.config;
  const int levels = cfg.levels();
  const std::vector<int>& enc = cfg.encoder_blocks;
  const std::vector<int> dec = cfg.resolved_decoder_blocks();

  int input = gb.add_input(cfg.input_channels, cfg.patch_side);
  net.input_layer = input;

  std::vector<int> enc_out(levels);

  // Full-resolution block: plain 3x3 convolutions, no batchnorm, no
  // feature reduction. Its output concat carries the raw input forward,
  // which is what the deepest skip connection delivers to the last
  // decoder block.
  enc_out[0] =
      dense_block(gb, cfg, "enc1", input, enc[0], /*plain=*/true,
                  Activation::elu, /*bn_per_conv=*/false)
          .output;

  int prev = enc_out[0];
  for (int level = 1; level < levels; ++level) {
    // Transition from the previous level. After the first block there is
    // no compression, only pooling.
    int pooled;
    if (level == 1) {
      pooled = gb.add_pool("down1/pool", prev);
    } else {
      int n_prev = enc[level - 1];
      int compressed = round_half_up(cfg.compression * cfg.growth_rate * n_prev);
      int red = gb.add_reduction("down" + std::to_string(level) + "/reduce",
                                 prev, compressed, Activation::elu, true);
      pooled = gb.add_pool("down" + std::to_string(level) + "/pool", red);
    }
    // The input image joins every downsampling-path block, reduced to the
    // current resolution by average pooling.
    int factor = 1 << level;
    int inj = gb.add_inject("enc" + std::to_string(level + 1) + "/inject",
                            input, factor);
    int block_in = gb.add_concat("enc" + std::to_string(level + 1) + "/in",
                                 {pooled, inj});
    enc_out[level] =
        dense_block(gb, cfg, "enc" + std::to_string(level + 1), block_in,
                    enc[level], /*plain=*/false, Activation::elu, false)
            .output;
    prev = enc_out[level];
  }

  // Decoder: compress the full concatenation of the previous dense block,
  // upsample, concatenate the matching-resolution encoder output, run the
  // mirrored dense block.
  int n_prev = enc[levels - 1];
  for (int j = 0; j < levels - 1; ++j) {
    int compressed = round_half_up(cfg.compression * cfg.growth_rate * n_prev);
    std::string up = "up" + std::to_string(j + 1);
    int red = gb.add_reduction(up + "/reduce", prev, compressed,
                               Activation::elu, true);
    int upsampled = gb.add_tconv(up + "/tconv", red, compressed);
    int skip = enc_out[levels - 2 - j];
    std::string blk = "dec" + std::to_string(j + 1);
    int block_in = gb.add_concat(blk + "/in", {upsampled, skip});
    prev = dense_block(gb, cfg, blk, block_in, dec[j], /*plain=*/false,
                       Activation::elu, false)
               .output;
    n_prev = dec[j];
  }

  net.output_layer = gb.add_head("head", prev, cfg.head_channels());
}

// Reference fully convolutional DenseNet at matched depth and width:
// 48-wide stem convolution, per-layer batchnorm with ReLU, no feature
// reduction inside conv blocks, transitions compressed by the same law,
// and each transposed convolution fed by the last conv block's output
// maps only.
constexpr int kTiramisuStemWidth = 48;

void build_tiramisu(Network& net, GraphBuilder& gb) {
  const NetworkConfig& cfg = net.config;
  const int levels = cfg.levels();
  const std::vector<int>& enc = cfg.encoder_blocks;
  const std::vector<int> dec = cfg.resolved_decoder_blocks();

  int input = gb.add_input(cfg.input_channels, cfg.patch_side);
  net.input_layer = input;

  int stem = gb.add_conv3x3("stem", input, kTiramisuStemWidth,
                            Activation::none, false);

  std::vector<int> enc_out(levels);
  int prev = stem;
  int last_conv = -1;
  for (int level = 0; level < levels; ++level) {
    DenseBlockResult blk =
        dense_block(gb, cfg, "enc" + std::to_string(level + 1), prev,
                    enc[level], /*plain=*/true, Activation::relu,
                    /*bn_per_conv=*/true);
    enc_out[level] = blk.output;
    last_conv = blk.last_conv;
    if (level < levels - 1) {
      int compressed =
          round_half_up(cfg.compression * cfg.growth_rate * enc[level]);
      std::string down = "down" + std::to_string(level + 1);
      int red = gb.add_reduction(down + "/reduce", blk.output, compressed,
                                 Activation::relu, true);
      prev = gb.add_pool(down + "/pool", red);
    }
  }

  int running = -1;
  for (int j = 0; j < levels - 1; ++j) {
    std::string up = "up" + std::to_string(j + 1);
    int upsampled = gb.add_tconv(up + "/tconv", last_conv, cfg.growth_rate);
    int skip = enc_out[levels - 2 - j];
    std::string blk = "dec" + std::to_string(j + 1);
    int block_in = gb.add_concat(blk + "/in", {upsampled, skip});
    DenseBlockResult d =
        dense_block(gb, cfg, blk, block_in, dec[j], /*plain=*/true,
                    Activation::relu, /*bn_per_conv=*/true);
    running = d.output;
    last_conv = d.last_conv;
  }

  net.output_layer = gb.add_head("head", running, cfg.head_channels());
}

}  // namespace

Network build_network(const NetworkConfig& config, std::uint64_t init_seed) {
  config.validate();
  Network net;
  net.config = config;
  GraphBuilder gb(net, init_seed);
  if (config.variant == Variant::one_bn_denseunet)
    build_one_bn(net, gb);
  else
    build_tiramisu(net, gb);
  return net;
}

std::int64_t count_parameters(const Network& net) {
  return net.params.learnable_count();
}

namespace {

std::int64_t layer_param_count(const Network& net, const std::string& name) {
  std::int64_t total = 0;
  for (const char* suffix : {"/w", "/b", "/bn_gamma", "/bn_beta"}) {
    if (net.params.has(name + suffix)) total += net.params.get(name + suffix).count();
  }
  return total;
}

}  // namespace

std::string architecture_report(const Network& net) {
  std::ostringstream os;
  os << "variant: " << to_string(net.config.variant) << "\n";
  os << "input: " << net.config.patch_side << "x" << net.config.patch_side
     << "x" << net.config.input_channels << "\n\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-22s %-18s %-14s %10s  %s\n", "layer",
                "kind", "out (HxWxC)", "params", "inputs");
  os << line;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    const LayerShape& s = net.shape_table[i];
    std::string shape = std::to_string(s.h) + "x" + std::to_string(s.w) + "x" +
                        std::to_string(s.c);
    std::string ins;
    for (int in : l.inputs) {
      if (!ins.empty()) ins += ",";
      ins += net.layers[in].name;
    }
    std::snprintf(line, sizeof(line), "%-22s %-18s %-14s %10lld  %s\n",
                  l.name.c_str(), to_string(l.kind), shape.c_str(),
                  static_cast<long long>(layer_param_count(net, l.name)),
                  ins.c_str());
    os << line;
  }
  os << "\ntotal learnable parameters: " << count_parameters(net) << "\n";
  return os.str();
}

}  // namespace histoseg::netgraph
