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

#ifndef HISTOSEG_IO_IMAGE_IO_HPP_
#define HISTOSEG_IO_IMAGE_IO_HPP_

#include <cstdint>
#include <string>

#include "histoseg/image.hpp"
#include "histoseg/labels/labels.hpp"

namespace histoseg::io {

/// Loads an 8-bit color image and scales it to [0,1]. Throws
/// std::runtime_error naming the path on failure.
RgbImage load_rgb(const std::string& path);

/// Writes as 8-bit color, clamping to [0,1] first.
void save_rgb(const std::string& path, const RgbImage& img);

/// Loads an 8-bit single-channel class map and validates it against the
/// declared class space.
labels::GradeMap load_grade_map(const std::string& path,
                                labels::ClassSpace space);

/// Writes class indices verbatim as 8-bit grayscale.
void save_grade_map(const std::string& path, const labels::GradeMap& map);

/// Loads a binary mask; any nonzero pixel counts as tissue.
TissueMask load_mask(const std::string& path);

/// Writes a mask as 8-bit grayscale with tissue = 255.
void save_mask(const std::string& path, const TissueMask& mask);

/// Writes raw 8-bit grayscale data (probability maps, heat maps).
void save_gray(const std::string& path, const std::uint8_t* data, int height,
               int width);

}  // namespace histoseg::io

#endif  // HISTOSEG_IO_IMAGE_IO_HPP_
