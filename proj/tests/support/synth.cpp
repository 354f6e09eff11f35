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

#include "support/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "histoseg/io/image_io.hpp"
#include "histoseg/rng.hpp"

namespace fs = std::filesystem;

namespace histoseg::testing {

namespace {

std::string two_digit(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%02d", prefix, i);
  return buf;
}

TissueMask full_mask(int side) {
  TissueMask mask(side, side);
  std::fill(mask.mask.begin(), mask.mask.end(), std::uint8_t{1});
  return mask;
}

}  // namespace

RgbImage flat_image(int height, int width, Rgb color, std::uint64_t seed) {
  Rng rng(seed);
  RgbImage img(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double jitter = (rng.uniform() - 0.5) * 0.03;
      img.at(y, x, 0) = std::clamp(color.r + jitter, 0.0, 1.0);
      img.at(y, x, 1) = std::clamp(color.g + jitter, 0.0, 1.0);
      img.at(y, x, 2) = std::clamp(color.b + jitter, 0.0, 1.0);
    }
  return img;
}

void paint_disk(RgbImage& img, int cy, int cx, int radius, Rgb color) {
  for (int y = std::max(0, cy - radius);
       y <= std::min(img.height - 1, cy + radius); ++y)
    for (int x = std::max(0, cx - radius);
         x <= std::min(img.width - 1, cx + radius); ++x)
      if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= radius * radius) {
        img.at(y, x, 0) = color.r;
        img.at(y, x, 1) = color.g;
        img.at(y, x, 2) = color.b;
      }
}

void paint_disk(labels::GradeMap& map, int cy, int cx, int radius,
                std::uint8_t grade) {
  for (int y = std::max(0, cy - radius);
       y <= std::min(map.height - 1, cy + radius); ++y)
    for (int x = std::max(0, cx - radius);
         x <= std::min(map.width - 1, cx + radius); ++x)
      if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= radius * radius)
        map.set(y, x, grade);
}

std::vector<std::string> make_digestpath_dataset(const std::string& root,
                                                 const DigestpathSpec& spec) {
  fs::create_directories(fs::path(root) / "images");
  fs::create_directories(fs::path(root) / "labels");
  if (spec.write_masks) fs::create_directories(fs::path(root) / "masks");
  Rng rng(spec.seed);
  std::vector<std::string> ids;

  for (int i = 0; i < spec.positive_images; ++i) {
    const std::string id = two_digit("pos", i);
    RgbImage img = flat_image(spec.side, spec.side, kPinkTissue,
                              spec.seed * 100 + i);
    labels::GradeMap label(spec.side, spec.side,
                           labels::ClassSpace::digestpath_binary);
    const int blobs = 1 + static_cast<int>(rng.uniform_int(3));
    for (int b = 0; b < blobs; ++b) {
      const int r = spec.side / 8 +
                    static_cast<int>(rng.uniform_int(spec.side / 8));
      const int cy = r + static_cast<int>(rng.uniform_int(
                             std::max(1, spec.side - 2 * r)));
      const int cx = r + static_cast<int>(rng.uniform_int(
                             std::max(1, spec.side - 2 * r)));
      paint_disk(img, cy, cx, r, kPurpleLesion);
      paint_disk(label, cy, cx, r, 1);
    }
    io::save_rgb((fs::path(root) / "images" / (id + ".png")).string(), img);
    io::save_grade_map((fs::path(root) / "labels" / (id + ".png")).string(),
                       label);
    if (spec.write_masks)
      io::save_mask((fs::path(root) / "masks" / (id + ".png")).string(),
                    full_mask(spec.side));
    ids.push_back(id);
  }
  for (int i = 0; i < spec.negative_images; ++i) {
    const std::string id = two_digit("neg", i);
    const RgbImage img = flat_image(spec.side, spec.side, kPinkTissue,
                                    spec.seed * 100 + 50 + i);
    const labels::GradeMap label(spec.side, spec.side,
                                 labels::ClassSpace::digestpath_binary);
    io::save_rgb((fs::path(root) / "images" / (id + ".png")).string(), img);
    io::save_grade_map((fs::path(root) / "labels" / (id + ".png")).string(),
                       label);
    if (spec.write_masks)
      io::save_mask((fs::path(root) / "masks" / (id + ".png")).string(),
                    full_mask(spec.side));
    ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::string> make_gleason_dataset(const std::string& root,
                                              const GleasonSpec& spec) {
  static const char* kNames[] = {"alice", "bob",  "carol",
                                 "dave",  "erin", "frank"};
  fs::create_directories(fs::path(root) / "images");
  fs::create_directories(fs::path(root) / "masks");
  for (int a = 0; a < spec.annotators; ++a)
    fs::create_directories(fs::path(root) / "labels" / kNames[a]);

  Rng rng(spec.seed);
  std::vector<std::string> ids;
  for (int i = 0; i < spec.images; ++i) {
    const std::string id = two_digit("case", i);
    RgbImage img = flat_image(spec.side, spec.side, kPinkTissue,
                              spec.seed * 100 + i);
    // Raw grades 3, 4, 5 -> merged 1, 2, 3; low grades 1/2 merge to benign.
    const int r = spec.side / 6;
    const int g3y = r + 2, g4y = spec.side / 2, g5y = spec.side - r - 3;
    const int cx = spec.side / 2;
    paint_disk(img, g3y, cx, r, {0.72, 0.49, 0.70});
    paint_disk(img, g4y, cx, r, {0.55, 0.30, 0.58});
    paint_disk(img, g5y, cx, r, kPurpleLesion);

    for (int a = 0; a < spec.annotators; ++a) {
      labels::GradeMap raw(spec.side, spec.side,
                           labels::ClassSpace::gleason_raw);
      // Annotators disagree on the blob extent by a small radius jitter
      // and grade a thin stripe as low-grade (merged away downstream).
      const int d = static_cast<int>(rng.uniform_int(3)) - 1;
      paint_disk(raw, g3y, cx, r + d, 3);
      paint_disk(raw, g4y, cx, r + d, 4);
      paint_disk(raw, g5y, cx, r + d, 5);
      for (int x = 0; x < spec.side; ++x) raw.set(0, x, a % 2 ? 1 : 2);
      io::save_grade_map(
          (fs::path(root) / "labels" / kNames[a] / (id + ".png")).string(),
          raw);
    }
    io::save_rgb((fs::path(root) / "images" / (id + ".png")).string(), img);
    io::save_mask((fs::path(root) / "masks" / (id + ".png")).string(),
                  full_mask(spec.side));
    ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::string> make_overfit_dataset(const std::string& root,
                                              const OverfitSpec& spec) {
  DigestpathSpec d;
  d.positive_images = spec.positive_images;
  d.negative_images = spec.negative_images;
  d.side = spec.side;
  d.seed = spec.seed;
  d.write_masks = true;
  return make_digestpath_dataset(root, d);
}

}  // namespace histoseg::testing
