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

#include "histoseg/sampler/patch_sampler.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>

#include "histoseg/io/image_io.hpp"
#include "histoseg/preprocess/color.hpp"
#include "histoseg/sampler/augment.hpp"

namespace fs = std::filesystem;

namespace histoseg::sampler {

namespace {

// Mirror an out-of-range coordinate back into [0,n) without repeating the
// edge pixel, matching the padding used at inference time.
int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

std::uint32_t draw_index(Rng& rng, std::size_t n) {
  return rng.uniform_int(static_cast<std::uint32_t>(n));
}

}  // namespace

const char* to_string(LabelSource source) {
  switch (source) {
    case LabelSource::single_annotator: return "single_annotator";
    case LabelSource::all_annotators: return "all_annotators";
    case LabelSource::majority_vote: return "majority_vote";
    case LabelSource::probabilistic: return "probabilistic";
  }
  return "?";
}

LabelSource label_source_from_string(const std::string& s) {
  if (s == "single_annotator") return LabelSource::single_annotator;
  if (s == "all_annotators") return LabelSource::all_annotators;
  if (s == "majority_vote") return LabelSource::majority_vote;
  if (s == "probabilistic") return LabelSource::probabilistic;
  throw std::invalid_argument("unknown label source '" + s + "'");
}

PatchSampler::PatchSampler(const DatasetIndex& index,
                           const SamplerConfig& config)
    : index_(index), config_(config) {
  if (config_.patch_side <= 0)
    throw std::invalid_argument("patch side must be positive");
  if (config_.label_source == LabelSource::single_annotator &&
      config_.annotator_id.empty())
    throw std::invalid_argument("single_annotator mode needs an annotator id");
  if (config_.cache_images < 1) config_.cache_images = 1;
}

const PatchSampler::CachedImage& PatchSampler::image_data(
    const IndexEntry& entry) {
  auto it = cache_.find(entry.image_id);
  if (it != cache_.end()) {
    cache_order_.remove(entry.image_id);
    cache_order_.push_front(entry.image_id);
    return it->second;
  }
  const fs::path root(index_.root);
  const RgbImage rgb = io::load_rgb((root / entry.image_path).string());
  if (rgb.height != entry.height || rgb.width != entry.width)
    throw std::runtime_error("index is stale: image '" + entry.image_id +
                             "' changed size");
  CachedImage data;
  data.six = preprocess::to_six_channel(rgb);
  const TissueMask tissue =
      entry.mask_path.empty()
          ? preprocess::make_tissue_mask(rgb, index_.mask)
          : io::load_mask((root / entry.mask_path).string());
  if (index_.task == metrics::Task::digestpath) {
    const TissueMask raw =
        io::load_mask((root / "labels" / (entry.image_id + ".png")).string());
    data.binary = labels::GradeMap(rgb.height, rgb.width,
                                   labels::ClassSpace::digestpath_binary);
    for (int y = 0; y < rgb.height; ++y)
      for (int x = 0; x < rgb.width; ++x)
        data.binary.set(y, x, raw.at(y, x) ? 1 : 0);
  } else {
    labels::AnnotationSet set;
    set.image_id = entry.image_id;
    set.tissue = tissue;
    for (const AnnotatorCenters& ac : entry.annotators) {
      if (ac.annotator_id == "majority") continue;
      const fs::path p =
          root / "labels" / ac.annotator_id / (entry.image_id + ".png");
      labels::Annotation a;
      a.annotator_id = ac.annotator_id;
      a.map = labels::apply_tissue_gate(
          labels::merge_low_grades(
              io::load_grade_map(p.string(), labels::ClassSpace::gleason_raw)),
          tissue);
      set.maps.push_back(std::move(a));
    }
    data.majority = labels::majority_vote(set);
    data.maps = std::move(set.maps);
  }
  while (static_cast<int>(cache_.size()) >=
         std::max(1, config_.cache_images)) {
    cache_.erase(cache_order_.back());
    cache_order_.pop_back();
  }
  cache_order_.push_front(entry.image_id);
  return cache_.emplace(entry.image_id, std::move(data)).first->second;
}

Patch PatchSampler::extract(const IndexEntry& entry,
                            const std::string& annotator_id, Center center,
                            int center_class, bool negative_image,
                            int orientation) {
  const CachedImage& data = image_data(entry);
  const int side = config_.patch_side;
  const int half = side / 2;
  const int h = entry.height, w = entry.width;

  SixChannelImage crop(side, side);
  for (int oy = 0; oy < side; ++oy) {
    const int sy = reflect101(center.y - half + oy, h);
    for (int ox = 0; ox < side; ++ox) {
      const int sx = reflect101(center.x - half + ox, w);
      const double* s = &data.six.pixels[(static_cast<std::size_t>(sy) * w + sx) * 6];
      double* d = &crop.pixels[(static_cast<std::size_t>(oy) * side + ox) * 6];
      for (int c = 0; c < 6; ++c) d[c] = s[c];
    }
  }

  labels::ProbTarget target;
  if (index_.task == metrics::Task::gleason &&
      config_.label_source == LabelSource::probabilistic) {
    target = labels::ProbTarget(side, side, 4);
    const double share = 1.0 / static_cast<double>(data.maps.size());
    for (int oy = 0; oy < side; ++oy) {
      const int sy = reflect101(center.y - half + oy, h);
      for (int ox = 0; ox < side; ++ox) {
        const int sx = reflect101(center.x - half + ox, w);
        for (const labels::Annotation& a : data.maps)
          target.at(oy, ox, a.map.at(sy, sx)) += share;
      }
    }
  } else {
    const labels::GradeMap* src = nullptr;
    if (index_.task == metrics::Task::digestpath) {
      src = &data.binary;
    } else if (annotator_id == "majority") {
      src = &data.majority;
    } else {
      for (const labels::Annotation& a : data.maps)
        if (a.annotator_id == annotator_id) src = &a.map;
      if (!src)
        throw std::runtime_error("annotator '" + annotator_id +
                                 "' missing for image '" + entry.image_id +
                                 "'");
    }
    labels::GradeMap crop_map(side, side, src->space);
    for (int oy = 0; oy < side; ++oy) {
      const int sy = reflect101(center.y - half + oy, h);
      for (int ox = 0; ox < side; ++ox)
        crop_map.set(oy, ox, src->at(sy, reflect101(center.x - half + ox, w)));
    }
    target = labels::one_hot(
        crop_map, index_.task == metrics::Task::digestpath ? 2 : 4);
  }

  Patch patch;
  patch.pixels = orient_image(orientation, crop);
  patch.target = orient_probs(orientation, target);
  patch.provenance = {entry.image_id, annotator_id, center.y,
                      center.x,       center_class, negative_image,
                      orientation};
  return patch;
}

Batch PatchSampler::sample(Rng& rng) {
  return index_.task == metrics::Task::digestpath ? sample_digestpath(rng)
                                                  : sample_gleason(rng);
}

Batch PatchSampler::sample_digestpath(Rng& rng) {
  std::vector<int> lesion, benign_pos, negative;
  for (int i = 0; i < static_cast<int>(index_.entries.size()); ++i) {
    const IndexEntry& e = index_.entries[i];
    const AnnotatorCenters* ac = e.find_annotator("label");
    if (!ac) continue;
    if (!ac->per_class[1].empty()) lesion.push_back(i);
    if (e.positive && !ac->per_class[0].empty()) benign_pos.push_back(i);
    if (!e.positive && !ac->per_class[0].empty()) negative.push_back(i);
  }
  if (lesion.size() < 2 || negative.empty() || benign_pos.empty())
    throw std::runtime_error(
        "batch recipe unsatisfiable: " + std::to_string(lesion.size()) +
        " lesion image(s), " + std::to_string(benign_pos.size()) +
        " benign-candidate lesion image(s), " +
        std::to_string(negative.size()) + " negative image(s)");

  Batch batch;
  batch.seed_state = rng.state();

  const int img1 = lesion[draw_index(rng, lesion.size())];
  std::vector<int> lesion2 = lesion;
  lesion2.erase(std::find(lesion2.begin(), lesion2.end(), img1));
  const int img2 = lesion2[draw_index(rng, lesion2.size())];
  std::vector<int> benign = benign_pos;
  benign.erase(std::remove_if(benign.begin(), benign.end(),
                              [&](int i) { return i == img1 || i == img2; }),
               benign.end());
  if (benign.empty())
    throw std::runtime_error(
        "batch recipe unsatisfiable: no third lesion image with benign "
        "centers (" +
        std::to_string(benign_pos.size()) + " benign-candidate image(s))");
  const int img3 = benign[draw_index(rng, benign.size())];
  const int img4 = negative[draw_index(rng, negative.size())];

  struct Slot {
    int entry;
    int center_class;
    bool negative;
  };
  const Slot slots[kBatchSize] = {{img1, 1, false},
                                  {img2, 1, false},
                                  {img3, 0, false},
                                  {img4, 0, true}};
  for (const Slot& s : slots) {
    const IndexEntry& e = index_.entries[s.entry];
    const std::vector<Center>& centers =
        e.find_annotator("label")->per_class[s.center_class];
    const Center c = centers[draw_index(rng, centers.size())];
    const int orientation = static_cast<int>(draw_index(rng, kOrientationCount));
    batch.patches.push_back(
        extract(e, "label", c, s.center_class, s.negative, orientation));
  }
  rng.shuffle(batch.patches);
  return batch;
}

Batch PatchSampler::sample_gleason(Rng& rng) {
  // Which annotator ids can serve class c for an entry under the mode.
  const auto candidate_annotators = [&](const IndexEntry& e, int c) {
    std::vector<const AnnotatorCenters*> out;
    for (const AnnotatorCenters& a : e.annotators) {
      const bool fused = a.annotator_id == "majority";
      bool eligible = false;
      switch (config_.label_source) {
        case LabelSource::single_annotator:
          eligible = a.annotator_id == config_.annotator_id;
          break;
        case LabelSource::all_annotators:
          eligible = !fused;
          break;
        case LabelSource::majority_vote:
        case LabelSource::probabilistic:
          eligible = fused;
          break;
      }
      if (eligible && !a.per_class[c].empty()) out.push_back(&a);
    }
    return out;
  };

  std::array<std::vector<int>, kBatchSize> eligible;
  for (int c = 0; c < kBatchSize; ++c) {
    for (int i = 0; i < static_cast<int>(index_.entries.size()); ++i)
      if (!candidate_annotators(index_.entries[i], c).empty())
        eligible[c].push_back(i);
    if (eligible[c].empty())
      throw std::runtime_error("no candidate image for class " +
                               std::to_string(c) + " under label source " +
                               to_string(config_.label_source));
  }

  Batch batch;
  batch.seed_state = rng.state();

  constexpr int kAttempts = 64;
  std::array<int, kBatchSize> chosen{};
  bool ok = false;
  for (int attempt = 0; attempt < kAttempts && !ok; ++attempt) {
    ok = true;
    std::vector<int> used;
    for (int c = 0; c < kBatchSize; ++c) {
      std::vector<int> open;
      for (int i : eligible[c])
        if (std::find(used.begin(), used.end(), i) == used.end())
          open.push_back(i);
      if (open.empty()) {
        ok = false;  // greedy draw collided, retry the whole batch
        break;
      }
      chosen[c] = open[draw_index(rng, open.size())];
      used.push_back(chosen[c]);
    }
  }
  if (!ok) {
    std::string counts;
    for (int c = 0; c < kBatchSize; ++c)
      counts += (c ? ", " : "") + std::to_string(eligible[c].size());
    throw std::runtime_error(
        "could not assemble 4 distinct images after retries; candidate "
        "images per class: " +
        counts);
  }

  for (int c = 0; c < kBatchSize; ++c) {
    const IndexEntry& e = index_.entries[chosen[c]];
    const auto annotators = candidate_annotators(e, c);
    const AnnotatorCenters* a =
        annotators[draw_index(rng, annotators.size())];
    const std::vector<Center>& centers = a->per_class[c];
    const Center center = centers[draw_index(rng, centers.size())];
    const int orientation = static_cast<int>(draw_index(rng, kOrientationCount));
    const std::string map_id =
        config_.label_source == LabelSource::probabilistic ? "votes"
                                                           : a->annotator_id;
    batch.patches.push_back(extract(e, map_id, center, c, false, orientation));
  }
  rng.shuffle(batch.patches);
  return batch;
}

BatchPrefetcher::BatchPrefetcher(PatchSampler& sampler, const Rng& rng,
                                 int capacity)
    : sampler_(sampler), rng_(rng),
      capacity_(static_cast<std::size_t>(std::max(1, capacity))),
      thread_([this] { run(); }) {}

BatchPrefetcher::~BatchPrefetcher() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void BatchPrefetcher::run() {
  try {
    for (;;) {
      Batch batch = sampler_.sample(rng_);  // sole user of the sampler
      std::unique_lock<std::mutex> lock(mu_);
      cv_.wait(lock, [&] { return stop_ || queue_.size() < capacity_; });
      if (stop_) return;
      queue_.push_back(std::move(batch));
      cv_.notify_all();
    }
  } catch (...) {
    std::lock_guard<std::mutex> lock(mu_);
    error_ = std::current_exception();
    cv_.notify_all();
  }
}

Batch BatchPrefetcher::next() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [&] { return !queue_.empty() || error_; });
  if (queue_.empty()) std::rethrow_exception(error_);
  Batch batch = std::move(queue_.front());
  queue_.pop_front();
  cv_.notify_all();
  return batch;
}

}  // namespace histoseg::sampler
