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

#include "histoseg/preprocess/color.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace histoseg::preprocess {

void rgb_to_hsv(double r, double g, double b, double* h, double* s, double* v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  *v = mx;
  *s = mx > 0.0 ? delta / mx : 0.0;
  if (delta == 0.0) {
    *h = 0.0;
    return;
  }
  double hue;
  if (mx == r)
    hue = std::fmod((g - b) / delta, 6.0);
  else if (mx == g)
    hue = (b - r) / delta + 2.0;
  else
    hue = (r - g) / delta + 4.0;
  hue /= 6.0;
  if (hue < 0.0) hue += 1.0;
  *h = hue;
}

void hsv_to_rgb(double h, double s, double v, double* r, double* g, double* b) {
  if (s == 0.0) {
    *r = *g = *b = v;
    return;
  }
  const double sector = std::fmod(h, 1.0) * 6.0;
  const int i = std::min(static_cast<int>(sector), 5);
  const double f = sector - i;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (i) {
    case 0: *r = v; *g = t; *b = p; break;
    case 1: *r = q; *g = v; *b = p; break;
    case 2: *r = p; *g = v; *b = t; break;
    case 3: *r = p; *g = q; *b = v; break;
    case 4: *r = t; *g = p; *b = v; break;
    default: *r = v; *g = p; *b = q; break;
  }
}

SixChannelImage to_six_channel(const RgbImage& img) {
  SixChannelImage out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double r = img.at(y, x, 0);
      const double g = img.at(y, x, 1);
      const double b = img.at(y, x, 2);
      double h, s, v;
      rgb_to_hsv(r, g, b, &h, &s, &v);
      out.at(y, x, 0) = r;
      out.at(y, x, 1) = g;
      out.at(y, x, 2) = b;
      out.at(y, x, 3) = h;
      out.at(y, x, 4) = s;
      out.at(y, x, 5) = v;
    }
  }
  return out;
}

SixChannelImage downscale_input(const SixChannelImage& img, int factor) {
  if (factor < 1 || (factor & (factor - 1)) != 0)
    throw std::invalid_argument("downscale factor must be a power of two");
  if (img.height % factor != 0 || img.width % factor != 0)
    throw std::invalid_argument("image size not divisible by downscale factor");
  if (factor == 1) return img;
  SixChannelImage out(img.height / factor, img.width / factor);
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      for (int c = 0; c < 6; ++c) {
        double sum = 0.0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx)
            sum += img.at(y * factor + dy, x * factor + dx, c);
        out.at(y, x, c) = sum * inv;
      }
    }
  }
  return out;
}

}  // namespace histoseg::preprocess
