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

// Independent reference implementations. Deliberately naive: direct
// counting and O(everything) loops, no shared code with the library, so
// agreement is evidence rather than tautology.

#ifndef HISTOSEG_TESTS_SUPPORT_ORACLES_HPP_
#define HISTOSEG_TESTS_SUPPORT_ORACLES_HPP_

#include <cstdint>
#include <vector>

#include "histoseg/image.hpp"
#include "histoseg/tensor.hpp"

namespace histoseg::testing {

struct OracleMetrics {
  double accuracy = 0.0;
  double dice = 0.0;  // percent, foreground = class 1, empty/empty = 100
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double kappa = 0.0;
  double score = 0.0;  // kappa + (macro + micro) / 2
};

/// Tally-based metrics straight from per-class TP/FP/FN counters.
OracleMetrics metrics_oracle(const std::vector<std::uint8_t>& truth,
                             const std::vector<std::uint8_t>& pred, int k);

/// Plurality vote over one pixel's grades, ties resolved to the highest
/// grade among the tied counts.
std::uint8_t vote_oracle(const std::vector<std::uint8_t>& votes);

/// 3x3 convolution, stride 1, zero padding 1, weights (ky, kx, cin, cout).
Tensor conv3x3_oracle(const Tensor& in, const std::vector<double>& w,
                      const std::vector<double>& b, int cout);

/// 1x1 convolution, weights (cin, cout).
Tensor conv1x1_oracle(const Tensor& in, const std::vector<double>& w,
                      const std::vector<double>& b, int cout);

/// 2x2 stride-2 transposed convolution, weights (cin, ky, kx, cout).
Tensor tconv2x2_oracle(const Tensor& in, const std::vector<double>& w,
                       const std::vector<double>& b, int cout);

/// Disk dilation/erosion by definition: scan the whole disk per pixel,
/// out-of-image treated as background.
TissueMask dilate_oracle(const TissueMask& mask, int radius);
TissueMask erode_oracle(const TissueMask& mask, int radius);

/// Reflection across the image edge without repeating the border pixel.
int reflect101_oracle(int i, int n);

}  // namespace histoseg::testing

#endif  // HISTOSEG_TESTS_SUPPORT_ORACLES_HPP_
