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

#ifndef HISTOSEG_PREPROCESS_COLOR_HPP_
#define HISTOSEG_PREPROCESS_COLOR_HPP_

#include "histoseg/image.hpp"

namespace histoseg::preprocess {

/// Hexcone HSV of one RGB triple, all components in [0,1] (hue = angle/360).
void rgb_to_hsv(double r, double g, double b, double* h, double* s, double* v);

/// Inverse of rgb_to_hsv. For s == 0 the hue is ignored.
void hsv_to_rgb(double h, double s, double v, double* r, double* g, double* b);

/// Stacks the image with its HSV transform into the 6-channel network input.
SixChannelImage to_six_channel(const RgbImage& img);

/// Per-channel average pooling with window = stride = factor (a power of
/// two). Throws std::invalid_argument if the size does not divide.
SixChannelImage downscale_input(const SixChannelImage& img, int factor);

}  // namespace histoseg::preprocess

#endif  // HISTOSEG_PREPROCESS_COLOR_HPP_
