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

#ifndef HISTOSEG_SAMPLER_INDEX_HPP_
#define HISTOSEG_SAMPLER_INDEX_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "histoseg/metrics/metrics.hpp"
#include "histoseg/preprocess/tissue.hpp"

namespace histoseg::sampler {

// Expected dataset layout under the root directory:
//   images/<image_id>.png
//   labels/<image_id>.png                lesion maps, nonzero = lesion
//   labels/<annotator_id>/<image_id>.png grade maps, raw grades 0..5
//   masks/<image_id>.png                 optional tissue masks
// The flat labels/ form is the two-class task, the nested form the grading
// task. Missing masks are derived from the image at index time.

struct Center {
  int y = 0, x = 0;
};

/// Candidate patch centers for one label map, bucketed by merged class.
/// The id "majority" denotes the fused map; the two-class task uses the
/// single id "label".
struct AnnotatorCenters {
  std::string annotator_id;
  std::vector<std::vector<Center>> per_class;
};

struct IndexEntry {
  std::string image_id;
  std::string image_path;  // relative to the dataset root
  std::string mask_path;   // relative; empty when derived from the image
  int height = 0, width = 0;
  bool positive = false;  // two-class task: label contains lesion pixels
  std::vector<AnnotatorCenters> annotators;

  const AnnotatorCenters* find_annotator(const std::string& id) const;
};

struct IndexConfig {
  metrics::Task task = metrics::Task::digestpath;
  // Center lists longer than this are subsampled with the seed below so
  // the index stays bounded on slide-scale inputs.
  int center_cap = 20000;
  std::uint64_t seed = 1;
  preprocess::MaskConfig mask;
};

struct DatasetIndex {
  std::string root;
  metrics::Task task = metrics::Task::digestpath;
  int center_cap = 0;
  std::uint64_t seed = 0;
  // Kept so samplers re-derive missing masks exactly as the build did.
  preprocess::MaskConfig mask;
  std::vector<IndexEntry> entries;     // sorted by image_id
  std::vector<std::string> warnings;   // excluded inputs, with reasons
};

/// Scans the dataset and extracts verified candidate centers per class.
/// Inputs with size mismatches or unreadable files are excluded and
/// recorded in warnings. Throws if the layout itself is unusable.
DatasetIndex build_index(const std::string& dataset_root,
                         const IndexConfig& config);

/// JSON on disk; writing is byte-stable for identical inputs.
void save_index(const DatasetIndex& index, const std::string& path);
DatasetIndex load_index(const std::string& path);

}  // namespace histoseg::sampler

#endif  // HISTOSEG_SAMPLER_INDEX_HPP_
