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

#include "histoseg/trainer/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace histoseg::trainer {

namespace {
constexpr double kClip = 1e-7;
}

const char* to_string(LossMode mode) {
  return mode == LossMode::binary_ce ? "binary_ce" : "categorical_ce";
}

LossMode loss_mode_from_string(const std::string& s) {
  if (s == "binary_ce") return LossMode::binary_ce;
  if (s == "categorical_ce") return LossMode::categorical_ce;
  throw std::invalid_argument("unknown loss mode '" + s + "'");
}

double cross_entropy(const Tensor& pred, const Tensor& target, LossMode mode,
                     Tensor* dpred) {
  if (!pred.same_shape(target))
    throw std::invalid_argument("loss: prediction and target shapes differ");
  if (mode == LossMode::binary_ce && pred.c != 2)
    throw std::invalid_argument("binary_ce expects 2 channels, got " +
                                std::to_string(pred.c));
  if (mode == LossMode::categorical_ce && pred.c < 2)
    throw std::invalid_argument("categorical_ce expects >= 2 channels");
  const std::size_t total = pred.v.size();
  for (std::size_t i = 0; i < total; ++i)
    if (!std::isfinite(pred.v[i]) || !std::isfinite(target.v[i]))
      throw std::invalid_argument("loss: non-finite value in inputs");

  if (dpred) dpred->resize(pred.n, pred.h, pred.w, pred.c);
  const double pixels =
      static_cast<double>(pred.n) * pred.h * pred.w;
  double sum = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const double t = target.v[i];
    const double p = pred.v[i];
    const bool clipped = p < kClip || p > 1.0 - kClip;
    const double q = clipped ? (p < kClip ? kClip : 1.0 - kClip) : p;
    sum -= t * std::log(q);
    if (dpred) dpred->v[i] = clipped ? 0.0 : -t / (q * pixels);
  }
  return sum / pixels;
}

}  // namespace histoseg::trainer
