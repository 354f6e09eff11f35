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

#ifndef HISTOSEG_SAMPLER_PATCH_SAMPLER_HPP_
#define HISTOSEG_SAMPLER_PATCH_SAMPLER_HPP_

#include <condition_variable>
#include <deque>
#include <list>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "histoseg/image.hpp"
#include "histoseg/labels/labels.hpp"
#include "histoseg/rng.hpp"
#include "histoseg/sampler/index.hpp"

namespace histoseg::sampler {

/// Which label map supplies each patch's training target on the grading
/// task. The first three give one-hot targets, probabilistic gives
/// annotator vote frequencies.
enum class LabelSource {
  single_annotator,
  all_annotators,
  majority_vote,
  probabilistic,
};

const char* to_string(LabelSource source);
LabelSource label_source_from_string(const std::string& s);

struct SamplerConfig {
  int patch_side = 768;
  LabelSource label_source = LabelSource::majority_vote;
  std::string annotator_id;  // required for single_annotator
  int cache_images = 8;      // decoded images kept resident
};

struct PatchProvenance {
  std::string image_id;
  std::string annotator_id;  // map the target was built from
  int center_y = 0, center_x = 0;
  int center_class = 0;
  bool negative_image = false;  // two-class task: drawn from a lesion-free image
  int orientation = 0;
};

struct Patch {
  SixChannelImage pixels;
  labels::ProbTarget target;
  PatchProvenance provenance;
};

/// Four patches from four distinct images, pre-shuffled. seed_state is the
/// generator state before the draw, so any batch can be regenerated.
struct Batch {
  std::vector<Patch> patches;
  Rng::State seed_state;
};

inline constexpr int kBatchSize = 4;

/// Draws recipe-balanced batches from an indexed dataset. Two-class
/// batches hold two lesion-centered patches from distinct lesion images,
/// one benign-centered patch from a third lesion image, and one
/// tissue-centered patch from a lesion-free image. Grading batches hold
/// one patch centered on each class 0..3. Patches near borders are
/// completed by mirroring the image across its edge.
class PatchSampler {
 public:
  PatchSampler(const DatasetIndex& index, const SamplerConfig& config);

  /// Draws one batch; dispatches on the indexed task. Throws
  /// std::runtime_error with candidate counts when the recipe cannot be
  /// satisfied.
  Batch sample(Rng& rng);

  /// Builds a single patch. Exposed so tests can pin extraction geometry.
  Patch extract(const IndexEntry& entry, const std::string& annotator_id,
                Center center, int center_class, bool negative_image,
                int orientation);

  const DatasetIndex& index() const { return index_; }
  const SamplerConfig& config() const { return config_; }

 private:
  struct CachedImage {
    SixChannelImage six;
    labels::GradeMap binary;               // two-class label
    std::vector<labels::Annotation> maps;  // grading: merged, tissue-gated
    labels::GradeMap majority;
  };

  const CachedImage& image_data(const IndexEntry& entry);
  Batch sample_digestpath(Rng& rng);
  Batch sample_gleason(Rng& rng);

  DatasetIndex index_;
  SamplerConfig config_;
  std::unordered_map<std::string, CachedImage> cache_;
  std::list<std::string> cache_order_;  // front = most recent
};

/// Produces batches ahead of consumption on one background thread. The
/// batch sequence equals a serial driver with the same generator seed, so
/// prefetching never changes what is trained on.
class BatchPrefetcher {
 public:
  BatchPrefetcher(PatchSampler& sampler, const Rng& rng, int capacity = 4);
  ~BatchPrefetcher();

  BatchPrefetcher(const BatchPrefetcher&) = delete;
  BatchPrefetcher& operator=(const BatchPrefetcher&) = delete;

  /// Blocks until a batch is ready. Rethrows any producer-side error.
  Batch next();

 private:
  void run();

  PatchSampler& sampler_;
  Rng rng_;
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Batch> queue_;
  bool stop_ = false;
  std::exception_ptr error_;
  std::thread thread_;
};

}  // namespace histoseg::sampler

#endif  // HISTOSEG_SAMPLER_PATCH_SAMPLER_HPP_
