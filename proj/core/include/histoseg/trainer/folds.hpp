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

#ifndef HISTOSEG_TRAINER_FOLDS_HPP_
#define HISTOSEG_TRAINER_FOLDS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace histoseg::trainer {

/// Image-level cross-validation split. Folds partition the image set and
/// their sizes differ by at most one.
struct FoldPlan {
  int k = 10;
  std::map<std::string, int> assignments;  // image_id -> fold
  int validation_fold = 0;

  std::vector<std::string> members(int fold) const;
  bool is_validation(const std::string& image_id) const;
};

/// Seeded shuffle plus round-robin assignment. Requires at least k images;
/// duplicates are rejected. The input order does not matter (ids are
/// sorted before shuffling).
FoldPlan make_folds(std::vector<std::string> image_ids, int k,
                    std::uint64_t seed, int validation_fold = 0);

/// JSON round-trip; writing is byte-stable.
void save_folds(const FoldPlan& plan, const std::string& path);
FoldPlan load_folds(const std::string& path);

}  // namespace histoseg::trainer

#endif  // HISTOSEG_TRAINER_FOLDS_HPP_
