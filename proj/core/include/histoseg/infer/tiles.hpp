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

#ifndef HISTOSEG_INFER_TILES_HPP_
#define HISTOSEG_INFER_TILES_HPP_

#include <vector>

namespace histoseg::infer {

struct TileOrigin {
  int y = 0, x = 0;
};

/// Regular tiling of an image. Origins advance by stride; the final row
/// and column are shifted inward so tiles end exactly at the image edge.
/// Images smaller than a tile get a single origin at (0,0); the overhang
/// is completed by mirroring, recorded as pad_bottom/pad_right.
struct TilePlan {
  int image_h = 0, image_w = 0;
  int tile_side = 0;
  int overlap = 0;
  int stride = 0;
  int pad_bottom = 0, pad_right = 0;
  std::vector<TileOrigin> origins;  // row-major tile order
};

/// Throws std::invalid_argument on non-positive sizes or overlap outside
/// [0, tile_side).
TilePlan plan_tiles(int image_h, int image_w, int tile_side, int overlap);

}  // namespace histoseg::infer

#endif  // HISTOSEG_INFER_TILES_HPP_
