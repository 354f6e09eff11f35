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

#ifndef HISTOSEG_IMAGE_HPP_
#define HISTOSEG_IMAGE_HPP_

#include <cstdint>
#include <vector>

namespace histoseg {

/// RGB raster with values in [0,1] (converted from 8-bit on load).
struct RgbImage {
  int height = 0, width = 0;
  std::vector<double> pixels;  // H x W x 3, row major

  RgbImage() = default;
  RgbImage(int h, int w)
      : height(h), width(w),
        pixels(static_cast<std::size_t>(h) * w * 3, 0.0) {}

  double& at(int y, int x, int ch) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
  }
  double at(int y, int x, int ch) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
  }
};

/// Network input: channels 0-2 are the source RGB, channels 3-5 its HSV
/// transform (hue scaled to [0,1]).
struct SixChannelImage {
  int height = 0, width = 0;
  std::vector<double> pixels;  // H x W x 6

  SixChannelImage() = default;
  SixChannelImage(int h, int w)
      : height(h), width(w),
        pixels(static_cast<std::size_t>(h) * w * 6, 0.0) {}

  double& at(int y, int x, int ch) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 6 + ch];
  }
  double at(int y, int x, int ch) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 6 + ch];
  }
};

/// Binary tissue mask, true = tissue.
struct TissueMask {
  int height = 0, width = 0;
  std::vector<std::uint8_t> mask;  // H x W, 0 or 1

  TissueMask() = default;
  TissueMask(int h, int w)
      : height(h), width(w), mask(static_cast<std::size_t>(h) * w, 0) {}

  bool at(int y, int x) const {
    return mask[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int y, int x, bool v) {
    mask[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto m : mask) c += m != 0;
    return c;
  }
};

}  // namespace histoseg

#endif  // HISTOSEG_IMAGE_HPP_
