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

#include "histoseg/trainer/folds.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "histoseg/rng.hpp"
#include "json.hpp"

using json = nlohmann::json;

namespace histoseg::trainer {

std::vector<std::string> FoldPlan::members(int fold) const {
  std::vector<std::string> out;
  for (const auto& [id, f] : assignments)
    if (f == fold) out.push_back(id);
  return out;  // std::map iteration keeps ids sorted
}

bool FoldPlan::is_validation(const std::string& image_id) const {
  const auto it = assignments.find(image_id);
  return it != assignments.end() && it->second == validation_fold;
}

FoldPlan make_folds(std::vector<std::string> image_ids, int k,
                    std::uint64_t seed, int validation_fold) {
  if (k < 2) throw std::invalid_argument("fold count must be at least 2");
  if (static_cast<int>(image_ids.size()) < k)
    throw std::invalid_argument("need at least " + std::to_string(k) +
                                " images for " + std::to_string(k) +
                                " folds, have " +
                                std::to_string(image_ids.size()));
  if (validation_fold < 0 || validation_fold >= k)
    throw std::invalid_argument("validation fold outside [0,k)");
  std::sort(image_ids.begin(), image_ids.end());
  if (std::adjacent_find(image_ids.begin(), image_ids.end()) !=
      image_ids.end())
    throw std::invalid_argument("duplicate image id in fold input");
  Rng rng(seed);
  rng.shuffle(image_ids);
  FoldPlan plan;
  plan.k = k;
  plan.validation_fold = validation_fold;
  for (std::size_t i = 0; i < image_ids.size(); ++i)
    plan.assignments[image_ids[i]] = static_cast<int>(i % k);
  return plan;
}

void save_folds(const FoldPlan& plan, const std::string& path) {
  json doc;
  doc["format"] = "histoseg-folds-v1";
  doc["k"] = plan.k;
  doc["validation_fold"] = plan.validation_fold;
  doc["assignments"] = plan.assignments;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write folds '" + path + "'");
  out << doc.dump(1) << "\n";
}

FoldPlan load_folds(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read folds '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("folds '" + path + "': " + e.what());
  }
  if (doc.value("format", "") != "histoseg-folds-v1")
    throw std::runtime_error("folds '" + path + "' has unknown format tag");
  FoldPlan plan;
  plan.k = doc.at("k").get<int>();
  plan.validation_fold = doc.at("validation_fold").get<int>();
  plan.assignments =
      doc.at("assignments").get<std::map<std::string, int>>();
  return plan;
}

}  // namespace histoseg::trainer
