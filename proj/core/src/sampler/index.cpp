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

#include "histoseg/sampler/index.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "histoseg/io/image_io.hpp"
#include "histoseg/labels/labels.hpp"
#include "histoseg/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace histoseg::sampler {

const AnnotatorCenters* IndexEntry::find_annotator(
    const std::string& id) const {
  for (const AnnotatorCenters& a : annotators)
    if (a.annotator_id == id) return &a;
  return nullptr;
}

namespace {

constexpr const char* kFormatTag = "histoseg-index-v1";

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" ||
         ext == ".tif" || ext == ".tiff";
}

std::vector<fs::path> sorted_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_image_file(e.path())) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> sorted_subdirs(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

/// Uniform subsample down to cap, then restored to row-major order so the
/// serialized index does not depend on shuffle internals.
void cap_centers(std::vector<Center>& centers, int cap, std::uint64_t seed,
                 const std::string& stream_tag) {
  if (cap <= 0 || static_cast<int>(centers.size()) <= cap) return;
  Rng rng(seed, fnv1a64(stream_tag.data(), stream_tag.size()));
  for (int i = 0; i < cap; ++i) {
    const std::uint32_t span =
        static_cast<std::uint32_t>(centers.size() - i);
    std::swap(centers[i], centers[i + rng.uniform_int(span)]);
  }
  centers.resize(cap);
  std::sort(centers.begin(), centers.end(), [](const Center& a, const Center& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
}

/// Centers of pixels holding class c; class 0 additionally requires tissue
/// under the center so background patches stay on-slide.
std::vector<std::vector<Center>> extract_centers(const labels::GradeMap& map,
                                                 const TissueMask& tissue,
                                                 int n_classes) {
  std::vector<std::vector<Center>> per_class(n_classes);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const int c = map.at(y, x);
      if (c == 0 && !tissue.at(y, x)) continue;
      per_class[c].push_back({y, x});
    }
  }
  return per_class;
}

void cap_all(std::vector<std::vector<Center>>& per_class,
             const IndexConfig& cfg, const std::string& image_id,
             const std::string& annotator_id) {
  for (std::size_t c = 0; c < per_class.size(); ++c)
    cap_centers(per_class[c], cfg.center_cap, cfg.seed,
                image_id + "/" + annotator_id + "/" + std::to_string(c));
}

TissueMask load_or_derive_mask(const fs::path& root, const std::string& id,
                               const RgbImage& img, const IndexConfig& cfg,
                               std::string* mask_path) {
  const fs::path candidate = root / "masks" / (id + ".png");
  if (fs::exists(candidate)) {
    TissueMask m = io::load_mask(candidate.string());
    if (m.height == img.height && m.width == img.width) {
      *mask_path = "masks/" + id + ".png";
      return m;
    }
  }
  mask_path->clear();
  return preprocess::make_tissue_mask(img, cfg.mask);
}

void index_digestpath(const fs::path& root, const std::string& id,
                      const RgbImage& img, const TissueMask& tissue,
                      const IndexConfig& cfg, IndexEntry* entry,
                      std::vector<std::string>* warnings) {
  const fs::path label_path = root / "labels" / (id + ".png");
  if (!fs::exists(label_path)) {
    warnings->push_back(id + ": no label file, excluded");
    entry->image_id.clear();
    return;
  }
  // Lesion maps are stored with any nonzero value marking a lesion pixel.
  const TissueMask raw = io::load_mask(label_path.string());
  if (raw.height != img.height || raw.width != img.width) {
    warnings->push_back(id + ": label size " + std::to_string(raw.height) +
                        "x" + std::to_string(raw.width) +
                        " does not match image " +
                        std::to_string(img.height) + "x" +
                        std::to_string(img.width) + ", excluded");
    entry->image_id.clear();
    return;
  }
  labels::GradeMap map(img.height, img.width,
                       labels::ClassSpace::digestpath_binary);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      map.set(y, x, raw.at(y, x) ? 1 : 0);
  AnnotatorCenters ac;
  ac.annotator_id = "label";
  ac.per_class = extract_centers(map, tissue, 2);
  entry->positive = !ac.per_class[1].empty();
  cap_all(ac.per_class, cfg, id, ac.annotator_id);
  entry->annotators.push_back(std::move(ac));
}

void index_gleason(const fs::path& root, const std::string& id,
                   const RgbImage& img, const TissueMask& tissue,
                   const std::vector<std::string>& annotator_dirs,
                   const IndexConfig& cfg, IndexEntry* entry,
                   std::vector<std::string>* warnings) {
  labels::AnnotationSet set;
  set.image_id = id;
  set.tissue = tissue;
  for (const std::string& ann : annotator_dirs) {
    const fs::path p = root / "labels" / ann / (id + ".png");
    if (!fs::exists(p)) continue;
    labels::GradeMap raw;
    try {
      raw = io::load_grade_map(p.string(), labels::ClassSpace::gleason_raw);
    } catch (const std::exception& e) {
      warnings->push_back(id + "/" + ann + ": " + e.what() + ", excluded");
      continue;
    }
    if (raw.height != img.height || raw.width != img.width) {
      warnings->push_back(id + "/" + ann + ": label size " +
                          std::to_string(raw.height) + "x" +
                          std::to_string(raw.width) +
                          " does not match image, excluded");
      continue;
    }
    labels::Annotation a;
    a.annotator_id = ann;
    a.map = labels::apply_tissue_gate(labels::merge_low_grades(raw), tissue);
    set.maps.push_back(std::move(a));
  }
  if (set.maps.empty()) {
    warnings->push_back(id + ": no usable annotations, excluded");
    entry->image_id.clear();
    return;
  }
  for (const labels::Annotation& a : set.maps) {
    AnnotatorCenters ac;
    ac.annotator_id = a.annotator_id;
    ac.per_class = extract_centers(a.map, tissue, 4);
    cap_all(ac.per_class, cfg, id, ac.annotator_id);
    entry->annotators.push_back(std::move(ac));
  }
  AnnotatorCenters fused;
  fused.annotator_id = "majority";
  fused.per_class = extract_centers(labels::majority_vote(set), tissue, 4);
  cap_all(fused.per_class, cfg, id, fused.annotator_id);
  entry->annotators.push_back(std::move(fused));
}

json centers_to_json(const std::vector<Center>& centers) {
  json flat = json::array();
  for (const Center& c : centers) {
    flat.push_back(c.y);
    flat.push_back(c.x);
  }
  return flat;
}

std::vector<Center> centers_from_json(const json& flat) {
  if (!flat.is_array() || flat.size() % 2 != 0)
    throw std::runtime_error("index: malformed center list");
  std::vector<Center> out(flat.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = {flat[2 * i].get<int>(), flat[2 * i + 1].get<int>()};
  return out;
}

}  // namespace

DatasetIndex build_index(const std::string& dataset_root,
                         const IndexConfig& config) {
  const fs::path root(dataset_root);
  if (!fs::is_directory(root / "images"))
    throw std::runtime_error("no images/ directory under '" + dataset_root +
                             "'");
  if (!fs::is_directory(root / "labels"))
    throw std::runtime_error("no labels/ directory under '" + dataset_root +
                             "'");
  DatasetIndex index;
  index.root = dataset_root;
  index.task = config.task;
  index.center_cap = config.center_cap;
  index.seed = config.seed;
  index.mask = config.mask;
  std::vector<std::string> annotator_dirs;
  if (config.task == metrics::Task::gleason) {
    annotator_dirs = sorted_subdirs(root / "labels");
    if (annotator_dirs.empty())
      throw std::runtime_error("no annotator directories under labels/");
  }
  for (const fs::path& img_path : sorted_files(root / "images")) {
    const std::string id = img_path.stem().string();
    RgbImage img;
    try {
      img = io::load_rgb(img_path.string());
    } catch (const std::exception& e) {
      index.warnings.push_back(id + ": " + e.what() + ", excluded");
      continue;
    }
    IndexEntry entry;
    entry.image_id = id;
    entry.image_path = "images/" + img_path.filename().string();
    entry.height = img.height;
    entry.width = img.width;
    const TissueMask tissue =
        load_or_derive_mask(root, id, img, config, &entry.mask_path);
    if (config.task == metrics::Task::digestpath)
      index_digestpath(root, id, img, tissue, config, &entry, &index.warnings);
    else
      index_gleason(root, id, img, tissue, annotator_dirs, config, &entry,
                    &index.warnings);
    if (!entry.image_id.empty()) index.entries.push_back(std::move(entry));
  }
  return index;
}

void save_index(const DatasetIndex& index, const std::string& path) {
  json doc;
  doc["format"] = kFormatTag;
  doc["task"] = metrics::to_string(index.task);
  doc["center_cap"] = index.center_cap;
  doc["seed"] = index.seed;
  doc["root"] = index.root;
  doc["mask_radius"] = index.mask.radius;
  doc["mask_min_hole_area"] = index.mask.min_hole_area;
  doc["warnings"] = index.warnings;
  json entries = json::array();
  for (const IndexEntry& e : index.entries) {
    json je;
    je["image_id"] = e.image_id;
    je["image_path"] = e.image_path;
    je["mask_path"] = e.mask_path;
    je["height"] = e.height;
    je["width"] = e.width;
    je["positive"] = e.positive;
    json anns = json::array();
    for (const AnnotatorCenters& a : e.annotators) {
      json ja;
      ja["id"] = a.annotator_id;
      json classes = json::array();
      for (const std::vector<Center>& c : a.per_class)
        classes.push_back(centers_to_json(c));
      ja["classes"] = std::move(classes);
      anns.push_back(std::move(ja));
    }
    je["annotators"] = std::move(anns);
    entries.push_back(std::move(je));
  }
  doc["entries"] = std::move(entries);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write index '" + path + "'");
  out << doc.dump(1) << "\n";
  if (!out) throw std::runtime_error("failed writing index '" + path + "'");
}

DatasetIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read index '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("index '" + path + "': " + e.what());
  }
  if (doc.value("format", "") != kFormatTag)
    throw std::runtime_error("index '" + path + "' has unknown format tag");
  DatasetIndex index;
  index.task = metrics::task_from_string(doc.at("task").get<std::string>());
  index.center_cap = doc.at("center_cap").get<int>();
  index.seed = doc.at("seed").get<std::uint64_t>();
  index.root = doc.at("root").get<std::string>();
  index.mask.radius = doc.at("mask_radius").get<int>();
  index.mask.min_hole_area = doc.at("mask_min_hole_area").get<int>();
  index.warnings = doc.at("warnings").get<std::vector<std::string>>();
  for (const json& je : doc.at("entries")) {
    IndexEntry e;
    e.image_id = je.at("image_id").get<std::string>();
    e.image_path = je.at("image_path").get<std::string>();
    e.mask_path = je.at("mask_path").get<std::string>();
    e.height = je.at("height").get<int>();
    e.width = je.at("width").get<int>();
    e.positive = je.at("positive").get<bool>();
    for (const json& ja : je.at("annotators")) {
      AnnotatorCenters a;
      a.annotator_id = ja.at("id").get<std::string>();
      for (const json& jc : ja.at("classes"))
        a.per_class.push_back(centers_from_json(jc));
      e.annotators.push_back(std::move(a));
    }
    index.entries.push_back(std::move(e));
  }
  return index;
}

}  // namespace histoseg::sampler
