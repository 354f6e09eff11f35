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

#include "histoseg/netgraph/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

#include "histoseg/netgraph/executor.hpp"
#include "histoseg/rng.hpp"

namespace histoseg::netgraph {
namespace {

constexpr double kClip = 1e-7;

// Mean cross-entropy over pixels against a one-hot target, with the same
// probability clipping the trainer applies.
double ce_loss(const Tensor& probs, const Tensor& target, Tensor* dprobs) {
  const int C = probs.c;
  const long m = static_cast<long>(probs.n) * probs.h * probs.w;
  if (dprobs) dprobs->resize(probs.n, probs.h, probs.w, C);
  double loss = 0.0;
  for (long i = 0; i < m; ++i) {
    const double* p = &probs.v[static_cast<std::size_t>(i) * C];
    const double* t = &target.v[static_cast<std::size_t>(i) * C];
    for (int c = 0; c < C; ++c) {
      if (t[c] == 0.0) continue;
      const double clipped = std::min(std::max(p[c], kClip), 1.0 - kClip);
      loss -= t[c] * std::log(clipped);
      if (dprobs && p[c] > kClip && p[c] < 1.0 - kClip)
        dprobs->v[static_cast<std::size_t>(i) * C + c] =
            -t[c] / clipped / static_cast<double>(m);
    }
  }
  return loss / static_cast<double>(m);
}

struct Slot {
  int param;
  int element;
};

Slot pick_slot(const ParameterStore& store, std::int64_t flat) {
  const auto& all = store.all();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!all[i].learnable) continue;
    if (flat < all[i].count())
      return {static_cast<int>(i), static_cast<int>(flat)};
    flat -= all[i].count();
  }
  throw std::logic_error("gradient check: slot index out of range");
}

}  // namespace

GradCheckResult gradient_check(Network& net, const GradCheckOptions& opts) {
  Rng rng(opts.seed);
  const NetworkConfig& cfg = net.config;
  Tensor x(opts.batch, opts.side, opts.side, cfg.input_channels);
  for (double& v : x.v) v = rng.uniform();
  const int classes = cfg.head_channels();
  Tensor target;
  target.resize(opts.batch, opts.side, opts.side, classes);
  const long pixels = static_cast<long>(opts.batch) * opts.side * opts.side;
  for (long i = 0; i < pixels; ++i)
    target.v[static_cast<std::size_t>(i) * classes +
             rng.uniform_int(static_cast<std::uint32_t>(classes))] = 1.0;

  Executor ex(net);
  Tensor dprobs;
  const double base = ce_loss(ex.forward(x, Mode::training), target, &dprobs);
  if (!std::isfinite(base))
    throw std::runtime_error("gradient check: non-finite baseline loss");
  net.params.zero_grads();
  ex.backward(dprobs);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(net.params.all().size());
  for (const Param& p : net.params.all()) analytic.push_back(p.grad);

  const std::int64_t total = net.params.learnable_count();
  GradCheckResult result;
  for (int i = 0; i < opts.probe_count; ++i) {
    const std::int64_t flat =
        static_cast<std::int64_t>(rng.next_u64() % static_cast<std::uint64_t>(total));
    const Slot slot = pick_slot(net.params, flat);
    Param& p = net.params.all()[slot.param];
    const double saved = p.value[slot.element];

    p.value[slot.element] = saved + opts.step;
    const double lp = ce_loss(ex.forward(x, Mode::training), target, nullptr);
    p.value[slot.element] = saved - opts.step;
    const double lm = ce_loss(ex.forward(x, Mode::training), target, nullptr);
    p.value[slot.element] = saved;
    if (!std::isfinite(lp) || !std::isfinite(lm))
      throw std::runtime_error("gradient check: non-finite loss probing " +
                               p.name + "[" + std::to_string(slot.element) +
                               "]");

    GradProbe probe;
    probe.param = p.name;
    probe.element = slot.element;
    probe.analytic = analytic[slot.param][slot.element];
    probe.numeric = (lp - lm) / (2.0 * opts.step);
    const double mag = std::max(std::abs(probe.analytic),
                                std::abs(probe.numeric));
    if (mag < opts.zero_grad_threshold) {
      probe.error = std::abs(probe.analytic - probe.numeric);
      probe.relative = false;
    } else {
      probe.error = std::abs(probe.analytic - probe.numeric) / mag;
      probe.relative = true;
    }
    result.max_error = std::max(result.max_error, probe.error);
    result.probes.push_back(std::move(probe));
  }
  return result;
}

GradCheckResult gradient_check(const NetworkConfig& config,
                               const GradCheckOptions& opts) {
  Network net = build_network(config, opts.seed);
  if (count_parameters(net) >= 10000)
    throw std::invalid_argument(
        "gradient check wants a micro network, got " +
        std::to_string(count_parameters(net)) + " parameters");
  return gradient_check(net, opts);
}

}  // namespace histoseg::netgraph
