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

#ifndef HISTOSEG_INFER_STITCH_HPP_
#define HISTOSEG_INFER_STITCH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "histoseg/image.hpp"
#include "histoseg/infer/tiles.hpp"
#include "histoseg/labels/labels.hpp"
#include "histoseg/netgraph/executor.hpp"
#include "histoseg/netgraph/network.hpp"
#include "histoseg/tensor.hpp"

namespace histoseg::infer {

/// Produces per-pixel class probabilities for one tile. Abstracted so
/// stitching can be exercised with stub predictors of known output.
class TilePredictor {
 public:
  virtual ~TilePredictor() = default;
  virtual int tile_side() const = 0;
  virtual int channels() const = 0;
  /// tile: (1, side, side, 6) -> probabilities (1, side, side, channels).
  virtual Tensor predict(const Tensor& tile) = 0;
};

/// Runs a built network in inference mode (running batchnorm statistics,
/// activations freed eagerly).
class NetworkPredictor : public TilePredictor {
 public:
  explicit NetworkPredictor(netgraph::Network& net);
  int tile_side() const override;
  int channels() const override;
  Tensor predict(const Tensor& tile) override;

 private:
  netgraph::Network* net_;
  netgraph::Executor executor_;
};

/// Per-tile blending weight. cosine_ramp rises from 1 at the tile border
/// to 4 in the interior across the overlap margin, suppressing seams;
/// uniform averages overlapping tiles equally.
enum class WindowKind { uniform, cosine_ramp };

const char* to_string(WindowKind w);
WindowKind window_from_string(const std::string& s);

/// Normalized full-image probabilities. Each pixel is a convex
/// combination of the covering tiles' outputs.
struct StitchedPrediction {
  int height = 0, width = 0, channels = 0;
  Tensor probs;                // (1, H, W, K), rows sum to 1 per pixel
  std::vector<double> weight;  // H x W accumulated window weight, >= 1

  double at(int y, int x, int c) const {
    return probs.v[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

/// Tiles the image per plan (mirroring across borders), predicts each
/// tile, and accumulates weighted probabilities in tile-index order, so
/// results do not depend on scheduling.
StitchedPrediction predict_image(TilePredictor& predictor,
                                 const SixChannelImage& image,
                                 const TilePlan& plan,
                                 WindowKind window = WindowKind::cosine_ramp);

/// Per-pixel argmax; ties go to the higher class index. Two channels give
/// a two-class map, four give a merged-grade map.
labels::GradeMap decode(const StitchedPrediction& pred);

/// One probability channel as 8-bit grayscale, value = round(255 p).
std::vector<std::uint8_t> probability_bytes(const StitchedPrediction& pred,
                                            int channel);

/// Input image with class-colored contours of the decoded map drawn on
/// top, for visual inspection of stitched predictions.
RgbImage overlay_contours(const RgbImage& image, const labels::GradeMap& map);

}  // namespace histoseg::infer

#endif  // HISTOSEG_INFER_STITCH_HPP_
