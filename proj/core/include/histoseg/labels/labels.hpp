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

#ifndef HISTOSEG_LABELS_LABELS_HPP_
#define HISTOSEG_LABELS_LABELS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "histoseg/image.hpp"

namespace histoseg::labels {

enum class ClassSpace {
  digestpath_binary,  // {0,1}: benign tissue vs lesion
  gleason_raw,        // {0..5}: benign plus Gleason grades 1-5
  gleason_merged,     // {0,1,2,3}: benign, grade 3, grade 4, grade 5
};

int class_count(ClassSpace space);
const char* to_string(ClassSpace space);

/// Per-pixel class map. Values must lie in the declared class space;
/// validate() enforces it.
struct GradeMap {
  int height = 0, width = 0;
  ClassSpace space = ClassSpace::gleason_raw;
  std::vector<std::uint8_t> grades;  // H x W

  GradeMap() = default;
  GradeMap(int h, int w, ClassSpace s)
      : height(h), width(w), space(s),
        grades(static_cast<std::size_t>(h) * w, 0) {}

  std::uint8_t at(int y, int x) const {
    return grades[static_cast<std::size_t>(y) * width + x];
  }
  void set(int y, int x, std::uint8_t v) {
    grades[static_cast<std::size_t>(y) * width + x] = v;
  }
  void validate() const;  // throws std::invalid_argument on out-of-space value
};

/// Per-pixel class probability vector (annotator vote frequencies or a
/// one-hot indicator). channels is 4 for Gleason targets, 2 for binary.
struct ProbTarget {
  int height = 0, width = 0, channels = 0;
  std::vector<double> probs;  // H x W x channels

  ProbTarget() = default;
  ProbTarget(int h, int w, int c)
      : height(h), width(w), channels(c),
        probs(static_cast<std::size_t>(h) * w * c, 0.0) {}

  double at(int y, int x, int c) const {
    return probs[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double& at(int y, int x, int c) {
    return probs[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

struct Annotation {
  std::string annotator_id;
  GradeMap map;
};

/// All annotations of one image plus its tissue mask. Between one and six
/// annotators; ids unique; maps share the image size.
struct AnnotationSet {
  std::string image_id;
  std::vector<Annotation> maps;
  TissueMask tissue;
};

/// Grades 1 and 2 join the benign class; {0,3,4,5} re-index to {0,1,2,3}.
GradeMap merge_low_grades(const GradeMap& map);

/// Forces class 0 outside the tissue mask.
GradeMap apply_tissue_gate(const GradeMap& map, const TissueMask& tissue);

/// Per-pixel plurality vote; ties go to the numerically highest class
/// among the tied top counts. Maps must already be merged and gated.
GradeMap majority_vote(const AnnotationSet& set);

/// Per-pixel vote frequencies: probs[c] = votes for c / annotator count.
ProbTarget prob_encode(const AnnotationSet& set);

/// Indicator encoding. Throws if any class is >= n_classes.
ProbTarget one_hot(const GradeMap& map, int n_classes);

}  // namespace histoseg::labels

#endif  // HISTOSEG_LABELS_LABELS_HPP_
