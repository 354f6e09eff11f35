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

#include "support/oracles.hpp"

#include <cstdlib>
#include <stdexcept>

namespace histoseg::testing {

OracleMetrics metrics_oracle(const std::vector<std::uint8_t>& truth,
                             const std::vector<std::uint8_t>& pred, int k) {
  if (truth.size() != pred.size())
    throw std::invalid_argument("oracle: size mismatch");
  const double total = static_cast<double>(truth.size());
  std::vector<double> tp(k, 0), fp(k, 0), fn(k, 0), truth_n(k, 0), pred_n(k, 0);
  double matches = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = pred[i];
    truth_n[t] += 1;
    pred_n[p] += 1;
    if (t == p) {
      matches += 1;
      tp[t] += 1;
    } else {
      fn[t] += 1;
      fp[p] += 1;
    }
  }

  OracleMetrics m;
  m.accuracy = matches / total;

  double tp_sum = 0, fp_sum = 0, fn_sum = 0;
  for (int c = 0; c < k; ++c) {
    tp_sum += tp[c];
    fp_sum += fp[c];
    fn_sum += fn[c];
  }
  m.micro_f1 = (2 * tp_sum + fp_sum + fn_sum) > 0
                   ? 2 * tp_sum / (2 * tp_sum + fp_sum + fn_sum)
                   : 0.0;

  double macro_sum = 0;
  int macro_classes = 0;
  for (int c = 0; c < k; ++c) {
    if (truth_n[c] == 0) continue;
    ++macro_classes;
    const double denom = 2 * tp[c] + fp[c] + fn[c];
    macro_sum += denom > 0 ? 2 * tp[c] / denom : 0.0;
  }
  m.macro_f1 = macro_classes > 0 ? macro_sum / macro_classes : 0.0;

  double pe = 0;
  for (int c = 0; c < k; ++c) pe += (truth_n[c] / total) * (pred_n[c] / total);
  m.kappa = pe >= 1.0 ? 1.0 : (m.accuracy - pe) / (1.0 - pe);
  m.score = m.kappa + (m.macro_f1 + m.micro_f1) / 2.0;

  if (k == 2) {
    const double denom = 2 * tp[1] + fp[1] + fn[1];
    m.dice = denom > 0 ? 200.0 * tp[1] / denom : 100.0;
  }
  return m;
}

std::uint8_t vote_oracle(const std::vector<std::uint8_t>& votes) {
  if (votes.empty()) throw std::invalid_argument("oracle: no votes");
  int count[4] = {0, 0, 0, 0};
  for (std::uint8_t v : votes) count[v] += 1;
  int best = 0;
  for (int c = 1; c < 4; ++c)
    if (count[c] >= count[best]) best = c;  // >= walks ties upward
  return static_cast<std::uint8_t>(best);
}

Tensor conv3x3_oracle(const Tensor& in, const std::vector<double>& w,
                      const std::vector<double>& b, int cout) {
  Tensor out(in.n, in.h, in.w, cout);
  for (int n = 0; n < in.n; ++n)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x)
        for (int co = 0; co < cout; ++co) {
          double acc = b[co];
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int sy = y + ky - 1, sx = x + kx - 1;
              if (sy < 0 || sy >= in.h || sx < 0 || sx >= in.w) continue;
              for (int ci = 0; ci < in.c; ++ci)
                acc += in.at(n, sy, sx, ci) *
                       w[((ky * 3 + kx) * in.c + ci) * cout + co];
            }
          out.at(n, y, x, co) = acc;
        }
  return out;
}

Tensor conv1x1_oracle(const Tensor& in, const std::vector<double>& w,
                      const std::vector<double>& b, int cout) {
  Tensor out(in.n, in.h, in.w, cout);
  for (int n = 0; n < in.n; ++n)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x)
        for (int co = 0; co < cout; ++co) {
          double acc = b[co];
          for (int ci = 0; ci < in.c; ++ci)
            acc += in.at(n, y, x, ci) * w[ci * cout + co];
          out.at(n, y, x, co) = acc;
        }
  return out;
}

Tensor tconv2x2_oracle(const Tensor& in, const std::vector<double>& w,
                       const std::vector<double>& b, int cout) {
  Tensor out(in.n, in.h * 2, in.w * 2, cout);
  for (int n = 0; n < in.n; ++n)
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x)
        for (int co = 0; co < cout; ++co) out.at(n, y, x, co) = b[co];
  for (int n = 0; n < in.n; ++n)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x)
        for (int ci = 0; ci < in.c; ++ci)
          for (int ky = 0; ky < 2; ++ky)
            for (int kx = 0; kx < 2; ++kx)
              for (int co = 0; co < cout; ++co)
                out.at(n, 2 * y + ky, 2 * x + kx, co) +=
                    in.at(n, y, x, ci) *
                    w[((ci * 2 + ky) * 2 + kx) * cout + co];
  return out;
}

namespace {

TissueMask morph_oracle(const TissueMask& mask, int radius, bool dilate) {
  TissueMask out(mask.height, mask.width);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      bool hit = dilate ? false : true;
      for (int dy = -radius; dy <= radius && (dilate ? !hit : hit); ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          if (dy * dy + dx * dx > radius * radius) continue;
          const int sy = y + dy, sx = x + dx;
          const bool v = sy >= 0 && sy < mask.height && sx >= 0 &&
                         sx < mask.width && mask.at(sy, sx);
          if (dilate && v) {
            hit = true;
            break;
          }
          if (!dilate && !v) {
            hit = false;
            break;
          }
        }
      out.set(y, x, hit);
    }
  return out;
}

}  // namespace

TissueMask dilate_oracle(const TissueMask& mask, int radius) {
  return morph_oracle(mask, radius, true);
}

TissueMask erode_oracle(const TissueMask& mask, int radius) {
  return morph_oracle(mask, radius, false);
}

int reflect101_oracle(int i, int n) {
  if (n == 1) return 0;
  // Walk the zig-zag explicitly instead of using modular arithmetic.
  int pos = 0, dir = 1;
  for (int step = 0; step < std::abs(i); ++step) {
    if (pos == n - 1) dir = -1;
    if (pos == 0) dir = 1;
    pos += dir;
  }
  return pos;
}

}  // namespace histoseg::testing
