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

#include "histoseg/labels/labels.hpp"

#include <array>
#include <set>
#include <stdexcept>

namespace histoseg::labels {

int class_count(ClassSpace space) {
  switch (space) {
    case ClassSpace::digestpath_binary: return 2;
    case ClassSpace::gleason_raw: return 6;
    case ClassSpace::gleason_merged: return 4;
  }
  return 0;
}

const char* to_string(ClassSpace space) {
  switch (space) {
    case ClassSpace::digestpath_binary: return "digestpath_binary";
    case ClassSpace::gleason_raw: return "gleason_raw";
    case ClassSpace::gleason_merged: return "gleason_merged";
  }
  return "?";
}

void GradeMap::validate() const {
  const int k = class_count(space);
  for (std::size_t i = 0; i < grades.size(); ++i) {
    if (grades[i] >= k)
      throw std::invalid_argument(
          "grade map: value " + std::to_string(grades[i]) + " at pixel " +
          std::to_string(i) + " outside " + to_string(space));
  }
}

GradeMap merge_low_grades(const GradeMap& map) {
  if (map.space != ClassSpace::gleason_raw)
    throw std::invalid_argument("merge_low_grades expects raw Gleason grades");
  // benign and grades 1-2 collapse to 0; grades 3,4,5 become 1,2,3
  static constexpr std::array<std::uint8_t, 6> kMerge = {0, 0, 0, 1, 2, 3};
  GradeMap out(map.height, map.width, ClassSpace::gleason_merged);
  for (std::size_t i = 0; i < map.grades.size(); ++i) {
    if (map.grades[i] > 5)
      throw std::invalid_argument("merge_low_grades: grade " +
                                  std::to_string(map.grades[i]) +
                                  " outside 0..5");
    out.grades[i] = kMerge[map.grades[i]];
  }
  return out;
}

GradeMap apply_tissue_gate(const GradeMap& map, const TissueMask& tissue) {
  if (map.height != tissue.height || map.width != tissue.width)
    throw std::invalid_argument("tissue gate: size mismatch (" +
                                std::to_string(map.height) + "x" +
                                std::to_string(map.width) + " map vs " +
                                std::to_string(tissue.height) + "x" +
                                std::to_string(tissue.width) + " mask)");
  GradeMap out = map;
  for (std::size_t i = 0; i < out.grades.size(); ++i)
    if (tissue.mask[i] == 0) out.grades[i] = 0;
  return out;
}

namespace {

void check_set(const AnnotationSet& set) {
  if (set.maps.empty())
    throw std::invalid_argument("annotation set '" + set.image_id +
                                "' has no annotations");
  if (set.maps.size() > 6)
    throw std::invalid_argument("annotation set '" + set.image_id + "' has " +
                                std::to_string(set.maps.size()) +
                                " annotators, the supported maximum is 6");
  std::set<std::string> ids;
  for (const Annotation& a : set.maps) {
    if (!ids.insert(a.annotator_id).second)
      throw std::invalid_argument("duplicate annotator '" + a.annotator_id +
                                  "' on image '" + set.image_id + "'");
    if (a.map.space != ClassSpace::gleason_merged)
      throw std::invalid_argument("annotation by '" + a.annotator_id +
                                  "' is not in the merged class space");
    if (a.map.height != set.maps[0].map.height ||
        a.map.width != set.maps[0].map.width)
      throw std::invalid_argument("annotation sizes differ on image '" +
                                  set.image_id + "'");
  }
}

}  // namespace

GradeMap majority_vote(const AnnotationSet& set) {
  check_set(set);
  const int h = set.maps[0].map.height, w = set.maps[0].map.width;
  GradeMap out(h, w, ClassSpace::gleason_merged);
  for (std::size_t i = 0; i < out.grades.size(); ++i) {
    std::array<int, 4> votes{};
    for (const Annotation& a : set.maps) ++votes[a.map.grades[i]];
    int best = 0;
    for (int c = 1; c < 4; ++c)
      if (votes[c] >= votes[best]) best = c;  // >= drives ties upward
    out.grades[i] = static_cast<std::uint8_t>(best);
  }
  return out;
}

ProbTarget prob_encode(const AnnotationSet& set) {
  check_set(set);
  const int h = set.maps[0].map.height, w = set.maps[0].map.width;
  ProbTarget out(h, w, 4);
  const double inv = 1.0 / static_cast<double>(set.maps.size());
  for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i)
    for (const Annotation& a : set.maps)
      out.probs[i * 4 + a.map.grades[i]] += inv;
  return out;
}

ProbTarget one_hot(const GradeMap& map, int n_classes) {
  ProbTarget out(map.height, map.width, n_classes);
  for (std::size_t i = 0; i < map.grades.size(); ++i) {
    if (map.grades[i] >= n_classes)
      throw std::invalid_argument("one_hot: class " +
                                  std::to_string(map.grades[i]) +
                                  " does not fit in " +
                                  std::to_string(n_classes) + " channels");
    out.probs[i * n_classes + map.grades[i]] = 1.0;
  }
  return out;
}

}  // namespace histoseg::labels
