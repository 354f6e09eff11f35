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

#include "histoseg/preprocess/tissue.hpp"

#include <algorithm>
#include <vector>

#include "histoseg/preprocess/color.hpp"

namespace histoseg::preprocess {
namespace {

// Offsets of the disk structuring element, built once per call (radius is
// tiny compared to the image).
std::vector<std::pair<int, int>> disk_offsets(int radius) {
  std::vector<std::pair<int, int>> offs;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dy * dy + dx * dx <= radius * radius) offs.emplace_back(dy, dx);
  return offs;
}

}  // namespace

int otsu_threshold(const std::array<std::int64_t, 256>& histogram) {
  std::int64_t total = 0;
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) {
    total += histogram[i];
    sum_all += static_cast<double>(i) * histogram[i];
  }
  if (total == 0) return 255;
  std::int64_t w0 = 0;
  double sum0 = 0.0, best = -1.0;
  int best_bin = 255, last_occupied = 255;
  for (int t = 0; t < 256; ++t) {
    w0 += histogram[t];
    if (w0 == 0) continue;
    if (histogram[t] > 0) last_occupied = t;
    const std::int64_t w1 = total - w0;
    // Single occupied bin: no split exists; that bin itself is the
    // threshold, leaving the strictly-above foreground empty.
    if (w1 == 0) return best >= 0.0 ? best_bin : last_occupied;
    sum0 += static_cast<double>(t) * histogram[t];
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double between =
        static_cast<double>(w0) * static_cast<double>(w1) * (mu0 - mu1) *
        (mu0 - mu1);
    if (between > best) {
      best = between;
      best_bin = t;
    }
  }
  return best_bin;
}

TissueMask dilate_disk(const TissueMask& mask, int radius) {
  const auto offs = disk_offsets(radius);
  TissueMask out(mask.height, mask.width);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(y, x)) continue;
      for (const auto& [dy, dx] : offs) {
        const int yy = y + dy, xx = x + dx;
        if (yy >= 0 && yy < mask.height && xx >= 0 && xx < mask.width)
          out.set(yy, xx, true);
      }
    }
  }
  return out;
}

TissueMask erode_disk(const TissueMask& mask, int radius) {
  const auto offs = disk_offsets(radius);
  TissueMask out(mask.height, mask.width);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      bool all = true;
      for (const auto& [dy, dx] : offs) {
        const int yy = y + dy, xx = x + dx;
        if (yy < 0 || yy >= mask.height || xx < 0 || xx >= mask.width ||
            !mask.at(yy, xx)) {
          all = false;
          break;
        }
      }
      out.set(y, x, all);
    }
  }
  return out;
}

TissueMask fill_small_holes(const TissueMask& mask, int min_area) {
  TissueMask out = mask;
  std::vector<std::int32_t> label(
      static_cast<std::size_t>(mask.height) * mask.width, 0);
  std::vector<std::size_t> stack;
  std::int32_t next = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const std::size_t start = static_cast<std::size_t>(y) * mask.width + x;
      if (mask.mask[start] != 0 || label[start] != 0) continue;
      ++next;
      std::vector<std::size_t> component;
      stack.assign(1, start);
      label[start] = next;
      while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        component.push_back(i);
        const int cy = static_cast<int>(i) / mask.width;
        const int cx = static_cast<int>(i) % mask.width;
        const int ny[4] = {cy - 1, cy + 1, cy, cy};
        const int nx[4] = {cx, cx, cx - 1, cx + 1};
        for (int k = 0; k < 4; ++k) {
          if (ny[k] < 0 || ny[k] >= mask.height || nx[k] < 0 ||
              nx[k] >= mask.width)
            continue;
          const std::size_t j =
              static_cast<std::size_t>(ny[k]) * mask.width + nx[k];
          if (mask.mask[j] == 0 && label[j] == 0) {
            label[j] = next;
            stack.push_back(j);
          }
        }
      }
      if (static_cast<int>(component.size()) < min_area)
        for (std::size_t i : component) out.mask[i] = 1;
    }
  }
  return out;
}

TissueMask make_tissue_mask(const RgbImage& img, const MaskConfig& config) {
  std::vector<std::uint8_t> sat_bin(
      static_cast<std::size_t>(img.height) * img.width);
  std::array<std::int64_t, 256> hist{};
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double h, s, v;
      rgb_to_hsv(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2), &h, &s,
                 &v);
      const int bin = std::min(255, static_cast<int>(s * 256.0));
      sat_bin[static_cast<std::size_t>(y) * img.width + x] =
          static_cast<std::uint8_t>(bin);
      ++hist[bin];
    }
  }
  const int thresh = otsu_threshold(hist);
  TissueMask mask(img.height, img.width);
  for (std::size_t i = 0; i < sat_bin.size(); ++i)
    mask.mask[i] = sat_bin[i] > thresh ? 1 : 0;
  mask = erode_disk(dilate_disk(mask, config.radius), config.radius);
  mask = dilate_disk(erode_disk(mask, config.radius), config.radius);
  return fill_small_holes(mask, config.min_hole_area);
}

}  // namespace histoseg::preprocess
