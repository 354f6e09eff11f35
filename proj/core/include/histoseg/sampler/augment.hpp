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

#ifndef HISTOSEG_SAMPLER_AUGMENT_HPP_
#define HISTOSEG_SAMPLER_AUGMENT_HPP_

#include "histoseg/image.hpp"
#include "histoseg/labels/labels.hpp"

namespace histoseg::sampler {

// The eight square symmetries, indexed as r + 4f: first an optional
// horizontal flip (f), then r counterclockwise quarter turns. Index 0 is
// the identity. All of them permute pixels; no value is interpolated.
inline constexpr int kOrientationCount = 8;

/// Applies an orientation to an interleaved side x side x channels buffer.
/// src and dst must not alias. Throws on orientation outside [0,8).
void orient_pixels(int orientation, const double* src, double* dst, int side,
                   int channels);

/// Same permutation on a class map. Throws if the map is not square.
labels::GradeMap orient_grades(int orientation, const labels::GradeMap& map);

/// Same permutation on a probability target. Throws if not square.
labels::ProbTarget orient_probs(int orientation,
                                const labels::ProbTarget& target);

SixChannelImage orient_image(int orientation, const SixChannelImage& img);

/// Index of the orientation equal to applying `first`, then `then`.
int compose_orientations(int first, int then);

/// Index c with compose_orientations(o, c) == 0.
int inverse_orientation(int orientation);

}  // namespace histoseg::sampler

#endif  // HISTOSEG_SAMPLER_AUGMENT_HPP_
