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

#include "histoseg/netgraph/executor.hpp"

#include <cstring>
#include <stdexcept>

#include "histoseg/netgraph/ops.hpp"

namespace histoseg::netgraph {
namespace {

constexpr double kBnEps = 1e-3;
constexpr double kBnMomentum = 0.99;

// Rebuilds the normalized activations of a batchnorm layer from its input
// and the cached batch statistics, so they need not be stored per layer.
void recompute_xhat(const Tensor& in, const std::vector<double>& stats,
                    Tensor& xhat) {
  const int C = in.c;
  const long m = static_cast<long>(in.n) * in.h * in.w;
  xhat.resize(in.n, in.h, in.w, C);
  const double* mean = stats.data();
  const double* inv_std = stats.data() + 2 * C;
  for (long i = 0; i < m; ++i) {
    const double* p = &in.v[static_cast<std::size_t>(i) * C];
    double* o = &xhat.v[static_cast<std::size_t>(i) * C];
    for (int c = 0; c < C; ++c) o[c] = (p[c] - mean[c]) * inv_std[c];
  }
}

void affine_from_xhat(const Tensor& xhat, const std::vector<double>& gamma,
                      const std::vector<double>& beta, Tensor& out) {
  const int C = xhat.c;
  const long m = static_cast<long>(xhat.n) * xhat.h * xhat.w;
  out.resize(xhat.n, xhat.h, xhat.w, C);
  for (long i = 0; i < m; ++i) {
    const double* p = &xhat.v[static_cast<std::size_t>(i) * C];
    double* o = &out.v[static_cast<std::size_t>(i) * C];
    for (int c = 0; c < C; ++c) o[c] = gamma[c] * p[c] + beta[c];
  }
}

}  // namespace

Executor::Executor(Network& net) : net_(&net) {
  states_.resize(net_->layers.size());
  consumer_count_.assign(net_->layers.size(), 0);
  for (const LayerSpec& l : net_->layers)
    for (int in : l.inputs) ++consumer_count_[in];
  ++consumer_count_[net_->output_layer];  // never freed
}

void Executor::release(int idx) {
  std::vector<double>().swap(states_[idx].out.v);
}

const Tensor& Executor::forward(const Tensor& input, Mode mode) {
  const NetworkConfig& cfg = net_->config;
  if (input.c != cfg.input_channels)
    throw std::invalid_argument("forward: expected " +
                                std::to_string(cfg.input_channels) +
                                " input channels, got " +
                                std::to_string(input.c));
  const int df = cfg.downsample_factor();
  if (input.h % df != 0 || input.w % df != 0)
    throw std::invalid_argument(
        "forward: spatial size must be divisible by " + std::to_string(df));

  for (std::size_t i = 0; i < states_.size(); ++i) {
    states_[i].pending_consumers = consumer_count_[i];
    std::vector<double>().swap(states_[i].grad.v);
  }
  states_[net_->input_layer].out = input;
  for (int idx = 0; idx < static_cast<int>(net_->layers.size()); ++idx) {
    if (net_->layers[idx].kind != LayerKind::input) run_layer(idx, mode);
    if (mode == Mode::inference) {
      for (int in : net_->layers[idx].inputs)
        if (--states_[in].pending_consumers == 0) release(in);
    }
  }
  last_mode_ = mode;
  have_forward_ = true;
  return states_[net_->output_layer].out;
}

void Executor::run_layer(int idx, Mode mode) {
  const LayerSpec& l = net_->layers[idx];
  LayerState& st = states_[idx];
  const Tensor& in0 = states_[l.inputs.empty() ? 0 : l.inputs[0]].out;
  switch (l.kind) {
    case LayerKind::input:
      break;
    case LayerKind::input_inject:
      ops::avgpool_forward(in0, l.factor, st.out);
      break;
    case LayerKind::downsample:
      ops::avgpool_forward(in0, 2, st.out);
      break;
    case LayerKind::upsample:
      ops::tconv2x2_forward(in0, net_->params.get(l.name + "/w").value,
                            net_->params.get(l.name + "/b").value,
                            l.out_channels, st.out);
      break;
    case LayerKind::concat: {
      const int h = in0.h, w = in0.w;
      int ctotal = 0;
      for (int in : l.inputs) {
        const Tensor& t = states_[in].out;
        if (t.h != h || t.w != w || t.n != in0.n)
          throw std::invalid_argument("concat '" + l.name +
                                      "': input shapes differ");
        ctotal += t.c;
      }
      st.out.resize(in0.n, h, w, ctotal);
      const long rows = static_cast<long>(in0.n) * h * w;
      int off = 0;
      for (int in : l.inputs) {
        const Tensor& t = states_[in].out;
        for (long i = 0; i < rows; ++i)
          std::memcpy(&st.out.v[static_cast<std::size_t>(i) * ctotal + off],
                      &t.v[static_cast<std::size_t>(i) * t.c],
                      sizeof(double) * t.c);
        off += t.c;
      }
      break;
    }
    case LayerKind::conv3x3_elu:
    case LayerKind::feature_reduction: {
      const Tensor* src = &in0;
      if (l.batch_norm) {
        const auto& gamma = net_->params.get(l.name + "/bn_gamma").value;
        const auto& beta = net_->params.get(l.name + "/bn_beta").value;
        if (mode == Mode::training) {
          ops::BnCache cache;
          ops::batchnorm_forward_train(in0, gamma, beta, kBnEps, scratch_lin_,
                                       cache);
          const int C = in0.c;
          st.stats.resize(3 * C);
          std::memcpy(st.stats.data(), cache.mean.data(), sizeof(double) * C);
          std::memcpy(st.stats.data() + C, cache.var.data(),
                      sizeof(double) * C);
          std::memcpy(st.stats.data() + 2 * C, cache.inv_std.data(),
                      sizeof(double) * C);
        } else {
          ops::batchnorm_forward_infer(
              in0, gamma, beta, net_->params.get(l.name + "/bn_mean").value,
              net_->params.get(l.name + "/bn_var").value, kBnEps,
              scratch_lin_);
        }
        src = &scratch_lin_;
      }
      const auto& w = net_->params.get(l.name + "/w").value;
      const auto& b = net_->params.get(l.name + "/b").value;
      if (l.kind == LayerKind::conv3x3_elu)
        ops::conv3x3_forward(*src, w, b, l.out_channels, st.out);
      else
        ops::conv1x1_forward(*src, w, b, l.out_channels, st.out);
      if (l.act == Activation::elu)
        ops::elu_forward(st.out);
      else if (l.act == Activation::relu)
        ops::relu_forward(st.out);
      break;
    }
    case LayerKind::head:
      ops::conv1x1_forward(in0, net_->params.get(l.name + "/w").value,
                           net_->params.get(l.name + "/b").value,
                           l.out_channels, st.out);
      ops::softmax_forward(st.out);
      break;
  }
}

Tensor& Executor::grad_buffer(int idx) {
  Tensor& g = states_[idx].grad;
  const Tensor& out = states_[idx].out;
  if (g.v.empty()) g.resize(out.n, out.h, out.w, out.c);
  return g;
}

void Executor::backward(const Tensor& dloss_doutput) {
  if (!have_forward_ || last_mode_ != Mode::training)
    throw std::logic_error("backward requires a prior training-mode forward");
  const Tensor& out = states_[net_->output_layer].out;
  if (!dloss_doutput.same_shape(out))
    throw std::invalid_argument("backward: gradient shape mismatch");
  grad_buffer(net_->output_layer) = dloss_doutput;
  for (int idx = static_cast<int>(net_->layers.size()) - 1; idx >= 0; --idx) {
    if (states_[idx].grad.v.empty()) continue;
    backward_layer(idx);
    std::vector<double>().swap(states_[idx].grad.v);
  }
}

void Executor::backward_layer(int idx) {
  const LayerSpec& l = net_->layers[idx];
  LayerState& st = states_[idx];
  Tensor& g = st.grad;
  const int input_layer = net_->input_layer;
  switch (l.kind) {
    case LayerKind::input:
      break;
    case LayerKind::input_inject:
      // gradients never propagate into the raw image
      break;
    case LayerKind::downsample:
      if (l.inputs[0] != input_layer)
        ops::avgpool_backward(g, 2, &grad_buffer(l.inputs[0]));
      break;
    case LayerKind::upsample: {
      Param& w = net_->params.get(l.name + "/w");
      Param& b = net_->params.get(l.name + "/b");
      Tensor* din = l.inputs[0] != input_layer ? &grad_buffer(l.inputs[0])
                                               : nullptr;
      ops::tconv2x2_backward(states_[l.inputs[0]].out, w.value, l.out_channels,
                             g, din, &w.grad, &b.grad);
      break;
    }
    case LayerKind::concat: {
      const long rows = static_cast<long>(g.n) * g.h * g.w;
      int off = 0;
      for (int in : l.inputs) {
        const int c = states_[in].out.c;
        if (in != input_layer) {
          Tensor& din = grad_buffer(in);
          for (long i = 0; i < rows; ++i) {
            const double* src = &g.v[static_cast<std::size_t>(i) * g.c + off];
            double* dst = &din.v[static_cast<std::size_t>(i) * c];
            for (int k = 0; k < c; ++k) dst[k] += src[k];
          }
        }
        off += c;
      }
      break;
    }
    case LayerKind::conv3x3_elu:
    case LayerKind::feature_reduction: {
      if (l.act == Activation::elu)
        ops::elu_backward_from_output(st.out, g);
      else if (l.act == Activation::relu)
        ops::relu_backward_from_output(st.out, g);
      Param& w = net_->params.get(l.name + "/w");
      Param& b = net_->params.get(l.name + "/b");
      const Tensor& in0 = states_[l.inputs[0]].out;
      const bool want_din = l.inputs[0] != input_layer;
      if (l.batch_norm) {
        const auto& gamma = net_->params.get(l.name + "/bn_gamma").value;
        const auto& beta = net_->params.get(l.name + "/bn_beta").value;
        recompute_xhat(in0, st.stats, scratch_xhat_);
        affine_from_xhat(scratch_xhat_, gamma, beta, scratch_lin_);
        scratch_grad_.resize(in0.n, in0.h, in0.w, in0.c);
        if (l.kind == LayerKind::conv3x3_elu)
          ops::conv3x3_backward(scratch_lin_, w.value, l.out_channels, g,
                                &scratch_grad_, &w.grad, &b.grad);
        else
          ops::conv1x1_backward(scratch_lin_, w.value, l.out_channels, g,
                                &scratch_grad_, &w.grad, &b.grad);
        ops::BnCache cache;
        cache.xhat = std::move(scratch_xhat_);
        const int C = in0.c;
        cache.mean.assign(st.stats.begin(), st.stats.begin() + C);
        cache.var.assign(st.stats.begin() + C, st.stats.begin() + 2 * C);
        cache.inv_std.assign(st.stats.begin() + 2 * C, st.stats.end());
        Param& dg = net_->params.get(l.name + "/bn_gamma");
        Param& db = net_->params.get(l.name + "/bn_beta");
        ops::batchnorm_backward(cache, gamma, scratch_grad_,
                                want_din ? &grad_buffer(l.inputs[0]) : nullptr,
                                &dg.grad, &db.grad);
        scratch_xhat_ = std::move(cache.xhat);
      } else {
        Tensor* din = want_din ? &grad_buffer(l.inputs[0]) : nullptr;
        if (l.kind == LayerKind::conv3x3_elu)
          ops::conv3x3_backward(in0, w.value, l.out_channels, g, din, &w.grad,
                                &b.grad);
        else
          ops::conv1x1_backward(in0, w.value, l.out_channels, g, din, &w.grad,
                                &b.grad);
      }
      break;
    }
    case LayerKind::head: {
      ops::softmax_backward_from_output(st.out, g);
      Param& w = net_->params.get(l.name + "/w");
      Param& b = net_->params.get(l.name + "/b");
      Tensor* din = l.inputs[0] != input_layer ? &grad_buffer(l.inputs[0])
                                               : nullptr;
      ops::conv1x1_backward(states_[l.inputs[0]].out, w.value, l.out_channels,
                            g, din, &w.grad, &b.grad);
      break;
    }
  }
}

void Executor::update_running_stats() {
  if (!have_forward_ || last_mode_ != Mode::training)
    throw std::logic_error("running stats require a training-mode forward");
  for (std::size_t i = 0; i < net_->layers.size(); ++i) {
    const LayerSpec& l = net_->layers[i];
    if (!l.batch_norm) continue;
    const std::vector<double>& stats = states_[i].stats;
    Param& rm = net_->params.get(l.name + "/bn_mean");
    Param& rv = net_->params.get(l.name + "/bn_var");
    const int C = static_cast<int>(rm.value.size());
    for (int c = 0; c < C; ++c) {
      rm.value[c] = kBnMomentum * rm.value[c] + (1.0 - kBnMomentum) * stats[c];
      rv.value[c] =
          kBnMomentum * rv.value[c] + (1.0 - kBnMomentum) * stats[C + c];
    }
  }
}

Tensor forward(Network& net, const Tensor& input, Mode mode) {
  Executor ex(net);
  return ex.forward(input, mode);
}

}  // namespace histoseg::netgraph
