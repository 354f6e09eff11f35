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

#include "histoseg/infer/stitch.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace histoseg::infer {

namespace {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

// Separable window profile along one axis: 1 at the tile edge, 2 once the
// overlap margin is crossed. The two-axis product then spans [1, 4].
double axis_weight(int d, int side, int margin) {
  if (margin <= 0) return 1.0;
  const int edge_dist = std::min(d, side - 1 - d);
  const double t =
      std::min(1.0, static_cast<double>(edge_dist) / margin);
  return 1.0 + 0.5 * (1.0 - std::cos(3.14159265358979323846 * t));
}

}  // namespace

const char* to_string(WindowKind w) {
  return w == WindowKind::uniform ? "uniform" : "cosine_ramp";
}

WindowKind window_from_string(const std::string& s) {
  if (s == "uniform") return WindowKind::uniform;
  if (s == "cosine_ramp") return WindowKind::cosine_ramp;
  throw std::invalid_argument("unknown window '" + s + "'");
}

NetworkPredictor::NetworkPredictor(netgraph::Network& net)
    : net_(&net), executor_(net) {}

int NetworkPredictor::tile_side() const { return net_->config.patch_side; }

int NetworkPredictor::channels() const { return net_->head_channels(); }

Tensor NetworkPredictor::predict(const Tensor& tile) {
  return executor_.forward(tile, netgraph::Mode::inference);
}

StitchedPrediction predict_image(TilePredictor& predictor,
                                 const SixChannelImage& image,
                                 const TilePlan& plan, WindowKind window) {
  if (plan.image_h != image.height || plan.image_w != image.width)
    throw std::invalid_argument("tile plan was made for a different image");
  if (predictor.tile_side() != plan.tile_side)
    throw std::invalid_argument(
        "predictor tile side " + std::to_string(predictor.tile_side()) +
        " does not match plan tile side " + std::to_string(plan.tile_side));
  const int side = plan.tile_side;
  const int k = predictor.channels();
  const int h = image.height, w = image.width;

  StitchedPrediction out;
  out.height = h;
  out.width = w;
  out.channels = k;
  out.probs.resize(1, h, w, k);
  out.weight.assign(static_cast<std::size_t>(h) * w, 0.0);

  std::vector<double> win(static_cast<std::size_t>(side) * side);
  const int margin = window == WindowKind::cosine_ramp ? plan.overlap : 0;
  for (int ty = 0; ty < side; ++ty)
    for (int tx = 0; tx < side; ++tx)
      win[static_cast<std::size_t>(ty) * side + tx] =
          axis_weight(ty, side, margin) * axis_weight(tx, side, margin);

  Tensor tile(1, side, side, 6);
  for (const TileOrigin& origin : plan.origins) {
    for (int ty = 0; ty < side; ++ty) {
      const int sy = reflect101(origin.y + ty, h);
      for (int tx = 0; tx < side; ++tx) {
        const int sx = reflect101(origin.x + tx, w);
        const double* s =
            &image.pixels[(static_cast<std::size_t>(sy) * w + sx) * 6];
        double* d = &tile.v[(static_cast<std::size_t>(ty) * side + tx) * 6];
        for (int c = 0; c < 6; ++c) d[c] = s[c];
      }
    }
    const Tensor probs = predictor.predict(tile);
    if (probs.n != 1 || probs.h != side || probs.w != side || probs.c != k)
      throw std::invalid_argument("predictor returned unexpected tile shape");
    for (int ty = 0; ty < side; ++ty) {
      const int y = origin.y + ty;
      if (y < 0 || y >= h) continue;
      for (int tx = 0; tx < side; ++tx) {
        const int x = origin.x + tx;
        if (x < 0 || x >= w) continue;
        const double wgt = win[static_cast<std::size_t>(ty) * side + tx];
        const double* p =
            &probs.v[(static_cast<std::size_t>(ty) * side + tx) * k];
        double* acc =
            &out.probs.v[(static_cast<std::size_t>(y) * w + x) * k];
        for (int c = 0; c < k; ++c) acc[c] += wgt * p[c];
        out.weight[static_cast<std::size_t>(y) * w + x] += wgt;
      }
    }
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double wgt = out.weight[static_cast<std::size_t>(y) * w + x];
      if (wgt <= 0.0)
        throw std::logic_error("tile plan left a pixel uncovered");
      double* acc = &out.probs.v[(static_cast<std::size_t>(y) * w + x) * k];
      for (int c = 0; c < k; ++c) acc[c] /= wgt;
    }
  }
  return out;
}

labels::GradeMap decode(const StitchedPrediction& pred) {
  labels::ClassSpace space;
  if (pred.channels == 2) {
    space = labels::ClassSpace::digestpath_binary;
  } else if (pred.channels == 4) {
    space = labels::ClassSpace::gleason_merged;
  } else {
    throw std::invalid_argument("decode expects 2 or 4 channels, got " +
                                std::to_string(pred.channels));
  }
  labels::GradeMap map(pred.height, pred.width, space);
  for (int y = 0; y < pred.height; ++y) {
    for (int x = 0; x < pred.width; ++x) {
      int best = 0;
      for (int c = 1; c < pred.channels; ++c)
        if (pred.at(y, x, c) >= pred.at(y, x, best)) best = c;
      map.set(y, x, static_cast<std::uint8_t>(best));
    }
  }
  return map;
}

std::vector<std::uint8_t> probability_bytes(const StitchedPrediction& pred,
                                            int channel) {
  if (channel < 0 || channel >= pred.channels)
    throw std::invalid_argument("probability channel out of range");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(pred.height) *
                                pred.width);
  for (int y = 0; y < pred.height; ++y)
    for (int x = 0; x < pred.width; ++x)
      out[static_cast<std::size_t>(y) * pred.width + x] =
          static_cast<std::uint8_t>(
              std::lround(255.0 * pred.at(y, x, channel)));
  return out;
}

RgbImage overlay_contours(const RgbImage& image, const labels::GradeMap& map) {
  if (image.height != map.height || image.width != map.width)
    throw std::invalid_argument("overlay: image and map sizes differ");
  // Class 1..3 contour colors: green, orange, red.
  static const double kPalette[3][3] = {
      {0.0, 0.85, 0.2}, {1.0, 0.6, 0.0}, {0.9, 0.05, 0.05}};
  RgbImage out = image;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const int c = map.at(y, x);
      if (c == 0) continue;
      bool boundary = false;
      const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
      for (int d = 0; d < 4 && !boundary; ++d) {
        const int ny = y + dy[d], nx = x + dx[d];
        if (ny < 0 || ny >= map.height || nx < 0 || nx >= map.width) {
          boundary = true;  // lesion touching the image edge
        } else if (map.at(ny, nx) != c) {
          boundary = true;
        }
      }
      if (!boundary) continue;
      const double* color = kPalette[std::min(c - 1, 2)];
      for (int ch = 0; ch < 3; ++ch) out.at(y, x, ch) = color[ch];
    }
  }
  return out;
}

}  // namespace histoseg::infer
