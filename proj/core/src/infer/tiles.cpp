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

#include "histoseg/infer/tiles.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace histoseg::infer {

namespace {

std::vector<int> grid_positions(int n, int tile, int stride) {
  std::vector<int> pos;
  if (n <= tile) {
    pos.push_back(0);
    return pos;
  }
  for (int p = 0; p + tile <= n; p += stride) pos.push_back(p);
  if (pos.back() + tile < n) pos.push_back(n - tile);
  return pos;
}

}  // namespace

TilePlan plan_tiles(int image_h, int image_w, int tile_side, int overlap) {
  if (image_h <= 0 || image_w <= 0)
    throw std::invalid_argument("image size must be positive");
  if (tile_side <= 0)
    throw std::invalid_argument("tile side must be positive");
  if (overlap < 0 || overlap >= tile_side)
    throw std::invalid_argument("overlap " + std::to_string(overlap) +
                                " must lie in [0, tile_side)");
  TilePlan plan;
  plan.image_h = image_h;
  plan.image_w = image_w;
  plan.tile_side = tile_side;
  plan.overlap = overlap;
  plan.stride = tile_side - overlap;
  const std::vector<int> ys = grid_positions(image_h, tile_side, plan.stride);
  const std::vector<int> xs = grid_positions(image_w, tile_side, plan.stride);
  for (int y : ys)
    for (int x : xs) plan.origins.push_back({y, x});
  plan.pad_bottom = std::max(0, ys.back() + tile_side - image_h);
  plan.pad_right = std::max(0, xs.back() + tile_side - image_w);
  return plan;
}

}  // namespace histoseg::infer
