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

#include "histoseg/sampler/augment.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace histoseg::sampler {

namespace {

void check_orientation(int o) {
  if (o < 0 || o >= kOrientationCount)
    throw std::invalid_argument("orientation " + std::to_string(o) +
                                " outside [0,8)");
}

// Destination of source pixel (y, x): horizontal flip when bit 2 is set,
// then (orientation & 3) counterclockwise quarter turns.
void map_coord(int orientation, int side, int y, int x, int* oy, int* ox) {
  if (orientation & 4) x = side - 1 - x;
  for (int i = orientation & 3; i > 0; --i) {
    const int ny = side - 1 - x;
    x = y;
    y = ny;
  }
  *oy = y;
  *ox = x;
}

// Composition table filled by applying pairs of orientations to a 3x3
// grid of distinct marks and matching the result against single moves.
const std::array<std::array<int, 8>, 8>& compose_table() {
  static const std::array<std::array<int, 8>, 8> table = [] {
    std::array<std::array<int, 8>, 8> t{};
    constexpr int kSide = 3;
    std::array<double, 9> base{};
    for (int i = 0; i < 9; ++i) base[i] = i;
    std::array<std::array<double, 9>, 8> single{};
    for (int o = 0; o < 8; ++o)
      orient_pixels(o, base.data(), single[o].data(), kSide, 1);
    for (int a = 0; a < 8; ++a) {
      for (int b = 0; b < 8; ++b) {
        std::array<double, 9> ab{};
        orient_pixels(b, single[a].data(), ab.data(), kSide, 1);
        int match = -1;
        for (int c = 0; c < 8 && match < 0; ++c)
          if (ab == single[c]) match = c;
        if (match < 0) throw std::logic_error("orientation group not closed");
        t[a][b] = match;
      }
    }
    return t;
  }();
  return table;
}

}  // namespace

void orient_pixels(int orientation, const double* src, double* dst, int side,
                   int channels) {
  check_orientation(orientation);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      int oy, ox;
      map_coord(orientation, side, y, x, &oy, &ox);
      const double* s = src + (static_cast<std::size_t>(y) * side + x) * channels;
      double* d = dst + (static_cast<std::size_t>(oy) * side + ox) * channels;
      for (int c = 0; c < channels; ++c) d[c] = s[c];
    }
  }
}

labels::GradeMap orient_grades(int orientation, const labels::GradeMap& map) {
  check_orientation(orientation);
  if (map.height != map.width)
    throw std::invalid_argument("orient_grades: map is not square");
  labels::GradeMap out(map.height, map.width, map.space);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      int oy, ox;
      map_coord(orientation, map.height, y, x, &oy, &ox);
      out.set(oy, ox, map.at(y, x));
    }
  }
  return out;
}

labels::ProbTarget orient_probs(int orientation,
                                const labels::ProbTarget& target) {
  check_orientation(orientation);
  if (target.height != target.width)
    throw std::invalid_argument("orient_probs: target is not square");
  labels::ProbTarget out(target.height, target.width, target.channels);
  orient_pixels(orientation, target.probs.data(), out.probs.data(),
                target.height, target.channels);
  return out;
}

SixChannelImage orient_image(int orientation, const SixChannelImage& img) {
  check_orientation(orientation);
  if (img.height != img.width)
    throw std::invalid_argument("orient_image: image is not square");
  SixChannelImage out(img.height, img.width);
  orient_pixels(orientation, img.pixels.data(), out.pixels.data(), img.height,
                6);
  return out;
}

int compose_orientations(int first, int then) {
  check_orientation(first);
  check_orientation(then);
  return compose_table()[first][then];
}

int inverse_orientation(int orientation) {
  check_orientation(orientation);
  for (int c = 0; c < kOrientationCount; ++c)
    if (compose_orientations(orientation, c) == 0) return c;
  throw std::logic_error("orientation has no inverse");  // unreachable
}

}  // namespace histoseg::sampler
