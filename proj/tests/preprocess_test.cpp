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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <cmath>

#include "doctest.h"
#include "histoseg/preprocess/color.hpp"
#include "histoseg/preprocess/tissue.hpp"
#include "histoseg/rng.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace histoseg;
using namespace histoseg::preprocess;

TEST_CASE("hsv of the primary colors") {
  double h, s, v;
  rgb_to_hsv(1, 0, 0, &h, &s, &v);
  CHECK(h == doctest::Approx(0.0));
  CHECK(s == doctest::Approx(1.0));
  CHECK(v == doctest::Approx(1.0));

  rgb_to_hsv(0, 1, 0, &h, &s, &v);
  CHECK(h == doctest::Approx(1.0 / 3.0));

  rgb_to_hsv(0, 0, 1, &h, &s, &v);
  CHECK(h == doctest::Approx(2.0 / 3.0));

  rgb_to_hsv(0.5, 0.5, 0.5, &h, &s, &v);
  CHECK(s == doctest::Approx(0.0));
  CHECK(v == doctest::Approx(0.5));

  rgb_to_hsv(0, 0, 0, &h, &s, &v);
  CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("hsv round-trips random colors") {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const double r = rng.uniform(), g = rng.uniform(), b = rng.uniform();
    double h, s, v, r2, g2, b2;
    rgb_to_hsv(r, g, b, &h, &s, &v);
    CHECK(h >= 0.0);
    CHECK(h < 1.0 + 1e-12);
    hsv_to_rgb(h, s, v, &r2, &g2, &b2);
    CHECK(r2 == doctest::Approx(r).epsilon(1e-9));
    CHECK(g2 == doctest::Approx(g).epsilon(1e-9));
    CHECK(b2 == doctest::Approx(b).epsilon(1e-9));
  }
}

TEST_CASE("six-channel stacking keeps rgb and appends hsv") {
  RgbImage img(2, 2);
  img.at(0, 0, 0) = 1.0;  // pure red pixel
  img.at(1, 1, 0) = 0.2;
  img.at(1, 1, 1) = 0.4;
  img.at(1, 1, 2) = 0.6;
  const SixChannelImage six = to_six_channel(img);
  CHECK(six.at(0, 0, 0) == doctest::Approx(1.0));
  CHECK(six.at(0, 0, 3) == doctest::Approx(0.0));  // hue of red
  CHECK(six.at(0, 0, 4) == doctest::Approx(1.0));  // saturation
  CHECK(six.at(0, 0, 5) == doctest::Approx(1.0));  // value
  double h, s, v;
  rgb_to_hsv(0.2, 0.4, 0.6, &h, &s, &v);
  CHECK(six.at(1, 1, 3) == doctest::Approx(h));
  CHECK(six.at(1, 1, 4) == doctest::Approx(s));
  CHECK(six.at(1, 1, 5) == doctest::Approx(v));
}

TEST_CASE("input downscaling averages blocks per channel") {
  SixChannelImage img(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      for (int c = 0; c < 6; ++c) img.at(y, x, c) = (y * 4 + x) * (c + 1);
  const SixChannelImage half = downscale_input(img, 2);
  REQUIRE(half.height == 2);
  CHECK(half.at(0, 0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
  CHECK(half.at(0, 0, 2) == doctest::Approx(3.0 * (0 + 1 + 4 + 5) / 4.0));
  CHECK_THROWS_AS(downscale_input(SixChannelImage(6, 6), 4),
                  std::invalid_argument);
}

TEST_CASE("otsu splits a bimodal histogram between the modes") {
  std::array<std::int64_t, 256> hist{};
  for (int i = 20; i < 40; ++i) hist[i] = 100;
  for (int i = 180; i < 220; ++i) hist[i] = 80;
  // t is the last background bin; any split in [39, 179] separates the
  // modes under the strictly-above foreground rule.
  const int t = otsu_threshold(hist);
  CHECK(t >= 39);
  CHECK(t < 180);
}

TEST_CASE("otsu on a degenerate histogram yields an empty foreground") {
  std::array<std::int64_t, 256> hist{};
  hist[7] = 1000;
  CHECK(otsu_threshold(hist) == 7);  // nothing is strictly above the bin
}

TEST_CASE("disk morphology agrees with the brute-force oracle") {
  Rng rng(6);
  for (int trial = 0; trial < 3; ++trial) {
    TissueMask mask(24, 31);
    for (int y = 0; y < mask.height; ++y)
      for (int x = 0; x < mask.width; ++x)
        mask.set(y, x, rng.uniform() < 0.4);
    for (int radius : {1, 2, 4}) {
      const TissueMask d = dilate_disk(mask, radius);
      const TissueMask dref = testing::dilate_oracle(mask, radius);
      const TissueMask e = erode_disk(mask, radius);
      const TissueMask eref = testing::erode_oracle(mask, radius);
      CHECK(d.mask == dref.mask);
      CHECK(e.mask == eref.mask);
    }
  }
}

TEST_CASE("erode treats the outside as background") {
  TissueMask all(10, 10);
  std::fill(all.mask.begin(), all.mask.end(), std::uint8_t{1});
  const TissueMask e = erode_disk(all, 2);
  CHECK_FALSE(e.at(0, 0));   // border shrinks
  CHECK(e.at(5, 5));         // interior survives
}

TEST_CASE("small holes are filled, large ones are kept") {
  TissueMask mask(40, 40);
  std::fill(mask.mask.begin(), mask.mask.end(), std::uint8_t{1});
  // A 2x2 hole (area 4) and a 10x10 hole (area 100).
  for (int y = 3; y < 5; ++y)
    for (int x = 3; x < 5; ++x) mask.set(y, x, false);
  for (int y = 20; y < 30; ++y)
    for (int x = 20; x < 30; ++x) mask.set(y, x, false);

  const TissueMask filled = fill_small_holes(mask, 50);
  CHECK(filled.at(3, 3));        // small hole closed
  CHECK_FALSE(filled.at(25, 25));  // large hole preserved
}

TEST_CASE("tissue mask finds a stained region on a blank slide") {
  RgbImage img = testing::flat_image(96, 96, testing::kWhiteSlide, 8);
  testing::paint_disk(img, 48, 48, 30, testing::kPinkTissue);
  // A small unstained hole inside the tissue should be swallowed.
  testing::paint_disk(img, 48, 48, 3, testing::kWhiteSlide);

  const TissueMask mask = make_tissue_mask(img);
  CHECK(mask.at(48, 48));
  CHECK(mask.at(48, 60));
  CHECK_FALSE(mask.at(2, 2));
  CHECK_FALSE(mask.at(2, 93));
  const double area = static_cast<double>(mask.count());
  const double disk = 3.14159 * 30 * 30;
  CHECK(area > 0.8 * disk);
  CHECK(area < 1.3 * disk);
}

TEST_CASE("tissue mask of a blank image is empty") {
  const RgbImage img = testing::flat_image(64, 64, testing::kWhiteSlide, 10);
  CHECK(make_tissue_mask(img).count() == 0);
}
