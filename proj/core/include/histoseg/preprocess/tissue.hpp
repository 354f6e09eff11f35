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

#ifndef HISTOSEG_PREPROCESS_TISSUE_HPP_
#define HISTOSEG_PREPROCESS_TISSUE_HPP_

#include <array>
#include <cstdint>

#include "histoseg/image.hpp"

namespace histoseg::preprocess {

struct MaskConfig {
  int radius = 5;           // disk radius for closing/opening, pixels
  int min_hole_area = 1024; // background components below this become tissue
};

/// Index of the Otsu threshold bin: pixels in bins strictly above it count
/// as foreground. Degenerate single-bin histograms yield that bin, so a
/// blank image thresholds to an empty mask.
int otsu_threshold(const std::array<std::int64_t, 256>& histogram);

/// Morphology with a disk structuring element; pixels outside the image
/// count as background for both operations, which keeps the result
/// equivariant under the 8 dihedral orientations.
TissueMask dilate_disk(const TissueMask& mask, int radius);
TissueMask erode_disk(const TissueMask& mask, int radius);

/// Turns every 4-connected background component smaller than min_area into
/// tissue.
TissueMask fill_small_holes(const TissueMask& mask, int min_area);

/// Saturation-based tissue detection: Otsu threshold on the 256-bin
/// saturation histogram, closing then opening with a disk of
/// config.radius, then hole filling. O(H*W*radius^2); intended to run once
/// per image with the result persisted.
TissueMask make_tissue_mask(const RgbImage& img, const MaskConfig& config = {});

}  // namespace histoseg::preprocess

#endif  // HISTOSEG_PREPROCESS_TISSUE_HPP_
