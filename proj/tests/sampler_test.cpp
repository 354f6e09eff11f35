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
#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "histoseg/io/image_io.hpp"
#include "histoseg/preprocess/color.hpp"
#include "histoseg/sampler/augment.hpp"
#include "histoseg/sampler/index.hpp"
#include "histoseg/sampler/patch_sampler.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"
#include "support/testenv.hpp"

using namespace histoseg;
using namespace histoseg::sampler;
using histoseg::testing::TempDir;

// ------------------------------------------------------------- augment

TEST_CASE("orientations form a closed group with identity and inverses") {
  for (int a = 0; a < kOrientationCount; ++a) {
    CHECK(compose_orientations(a, 0) == a);
    CHECK(compose_orientations(0, a) == a);
    CHECK(compose_orientations(a, inverse_orientation(a)) == 0);
    for (int b = 0; b < kOrientationCount; ++b) {
      const int c = compose_orientations(a, b);
      CHECK(c >= 0);
      CHECK(c < kOrientationCount);
    }
  }
  // Four quarter turns return home.
  int o = 0;
  for (int i = 0; i < 4; ++i) o = compose_orientations(o, 1);
  CHECK(o == 0);
}

TEST_CASE("composition table is consistent with acting on pixels") {
  SixChannelImage img(5, 5);
  Rng rng(3);
  for (double& v : img.pixels) v = rng.uniform();
  for (int a = 0; a < kOrientationCount; ++a)
    for (int b = 0; b < kOrientationCount; ++b) {
      const SixChannelImage seq = orient_image(b, orient_image(a, img));
      const SixChannelImage one =
          orient_image(compose_orientations(a, b), img);
      CHECK(seq.pixels == one.pixels);
    }
}

TEST_CASE("every orientation is a pixel permutation") {
  SixChannelImage img(7, 7);
  Rng rng(5);
  for (double& v : img.pixels) v = rng.uniform();
  std::vector<double> base = img.pixels;
  std::sort(base.begin(), base.end());
  for (int o = 0; o < kOrientationCount; ++o) {
    std::vector<double> turned = orient_image(o, img).pixels;
    std::sort(turned.begin(), turned.end());
    CHECK(turned == base);
  }
}

TEST_CASE("grades and probability targets turn with the pixels") {
  labels::GradeMap map(4, 4, labels::ClassSpace::gleason_merged);
  labels::ProbTarget probs(4, 4, 4);
  Rng rng(7);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const auto g = static_cast<std::uint8_t>(rng.uniform_int(4));
      map.set(y, x, g);
      probs.at(y, x, g) = 1.0;
    }
  for (int o = 0; o < kOrientationCount; ++o) {
    const labels::GradeMap tm = orient_grades(o, map);
    const labels::ProbTarget tp = orient_probs(o, probs);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x)
        CHECK(tp.at(y, x, tm.at(y, x)) == doctest::Approx(1.0));
  }
}

TEST_CASE("orientation 1 is a counterclockwise quarter turn") {
  SixChannelImage img(2, 2);
  img.at(0, 0, 0) = 1.0;  // top-left marker
  img.at(0, 1, 0) = 2.0;  // top-right
  const SixChannelImage t = orient_image(1, img);
  // CCW: the top-right corner moves to the top-left.
  CHECK(t.at(0, 0, 0) == doctest::Approx(2.0));
  CHECK(t.at(1, 0, 0) == doctest::Approx(1.0));
}

// --------------------------------------------------------------- index

TEST_CASE("digestpath index lists centers per class with tissue gating") {
  TempDir tmp("index_dp");
  testing::DigestpathSpec spec;
  const std::vector<std::string> ids =
      testing::make_digestpath_dataset(tmp.str(), spec);

  IndexConfig cfg;
  cfg.task = metrics::Task::digestpath;
  const DatasetIndex index = build_index(tmp.str(), cfg);
  CHECK(index.warnings.empty());
  REQUIRE(index.entries.size() == ids.size());
  CHECK(std::is_sorted(index.entries.begin(), index.entries.end(),
                       [](const IndexEntry& a, const IndexEntry& b) {
                         return a.image_id < b.image_id;
                       }));

  for (const IndexEntry& e : index.entries) {
    REQUIRE(e.annotators.size() == 1);
    CHECK(e.annotators[0].annotator_id == "label");
    REQUIRE(e.annotators[0].per_class.size() == 2);
    const bool expect_positive = e.image_id.rfind("pos", 0) == 0;
    CHECK(e.positive == expect_positive);
    CHECK(e.annotators[0].per_class[1].empty() == !expect_positive);
    CHECK_FALSE(e.annotators[0].per_class[0].empty());

    // Cross-check a few centers against the label map on disk.
    const labels::GradeMap label = io::load_grade_map(
        tmp.sub("labels/" + e.image_id + ".png"),
        labels::ClassSpace::digestpath_binary);
    for (int cls = 0; cls < 2; ++cls)
      for (std::size_t i = 0; i < e.annotators[0].per_class[cls].size();
           i += 97) {
        const Center c = e.annotators[0].per_class[cls][i];
        CHECK(label.at(c.y, c.x) == cls);
      }
  }
}

TEST_CASE("missing labels become warnings, not entries") {
  TempDir tmp("index_warn");
  testing::DigestpathSpec spec;
  spec.positive_images = 3;
  spec.negative_images = 1;
  testing::make_digestpath_dataset(tmp.str(), spec);
  std::filesystem::remove(tmp.sub("labels/pos01.png"));

  const DatasetIndex index = build_index(tmp.str(), IndexConfig{});
  CHECK(index.entries.size() == 3);
  REQUIRE(index.warnings.size() == 1);
  CHECK(index.warnings[0].find("pos01") != std::string::npos);
  for (const IndexEntry& e : index.entries) CHECK(e.image_id != "pos01");
}

TEST_CASE("center lists are capped by seeded subsampling") {
  TempDir tmp("index_cap");
  testing::DigestpathSpec spec;
  spec.positive_images = 1;
  spec.negative_images = 0;
  spec.side = 96;
  testing::make_digestpath_dataset(tmp.str(), spec);

  IndexConfig cfg;
  cfg.center_cap = 500;
  const DatasetIndex a = build_index(tmp.str(), cfg);
  const DatasetIndex b = build_index(tmp.str(), cfg);
  for (const auto& ac : a.entries[0].annotators)
    for (const auto& cls : ac.per_class) CHECK(cls.size() <= 500);
  // Same seed, same subsample.
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& ca = a.entries[0].annotators[0].per_class[c];
    const auto& cb = b.entries[0].annotators[0].per_class[c];
    REQUIRE(ca.size() == cb.size());
    for (std::size_t i = 0; i < ca.size(); ++i) {
      CHECK(ca[i].y == cb[i].y);
      CHECK(ca[i].x == cb[i].x);
    }
    CHECK(std::is_sorted(ca.begin(), ca.end(),
                         [](const Center& p, const Center& q) {
                           return p.y != q.y ? p.y < q.y : p.x < q.x;
                         }));
  }
}

TEST_CASE("gleason index carries every annotator plus the fused majority") {
  TempDir tmp("index_gl");
  testing::GleasonSpec spec;
  const std::vector<std::string> ids =
      testing::make_gleason_dataset(tmp.str(), spec);

  IndexConfig cfg;
  cfg.task = metrics::Task::gleason;
  const DatasetIndex index = build_index(tmp.str(), cfg);
  REQUIRE(index.entries.size() == ids.size());
  for (const IndexEntry& e : index.entries) {
    REQUIRE(e.annotators.size() == 4);  // alice, bob, carol + majority
    CHECK(e.find_annotator("majority") != nullptr);
    CHECK(e.find_annotator("alice") != nullptr);
    CHECK(e.find_annotator("nobody") == nullptr);
    for (const AnnotatorCenters& ac : e.annotators) {
      REQUIRE(ac.per_class.size() == 4);
      for (int cls = 0; cls < 4; ++cls)
        CHECK_FALSE(ac.per_class[cls].empty());
    }
  }
}

TEST_CASE("index JSON round-trips and writes byte-stably") {
  TempDir tmp("index_json");
  testing::DigestpathSpec spec;
  spec.positive_images = 3;
  spec.negative_images = 2;
  spec.side = 64;
  testing::make_digestpath_dataset(tmp.str(), spec);

  const DatasetIndex index = build_index(tmp.str(), IndexConfig{});
  save_index(index, tmp.sub("a.json"));
  save_index(index, tmp.sub("b.json"));
  CHECK(testing::read_file(tmp.sub("a.json")) ==
        testing::read_file(tmp.sub("b.json")));

  const DatasetIndex back = load_index(tmp.sub("a.json"));
  CHECK(back.task == index.task);
  CHECK(back.root == index.root);
  CHECK(back.center_cap == index.center_cap);
  CHECK(back.mask.radius == index.mask.radius);
  REQUIRE(back.entries.size() == index.entries.size());
  for (std::size_t i = 0; i < back.entries.size(); ++i) {
    CHECK(back.entries[i].image_id == index.entries[i].image_id);
    CHECK(back.entries[i].positive == index.entries[i].positive);
    CHECK(back.entries[i].height == index.entries[i].height);
  }
  save_index(back, tmp.sub("c.json"));
  CHECK(testing::read_file(tmp.sub("a.json")) ==
        testing::read_file(tmp.sub("c.json")));

  CHECK_THROWS_AS(load_index(tmp.sub("missing.json")), std::runtime_error);
}

// ------------------------------------------------------------- sampler

namespace {

DatasetIndex make_dp_index(const TempDir& tmp, int side = 96) {
  testing::DigestpathSpec spec;
  spec.side = side;
  testing::make_digestpath_dataset(tmp.str(), spec);
  IndexConfig cfg;
  cfg.task = metrics::Task::digestpath;
  return build_index(tmp.str(), cfg);
}

DatasetIndex make_gl_index(const TempDir& tmp) {
  testing::make_gleason_dataset(tmp.str(), testing::GleasonSpec{});
  IndexConfig cfg;
  cfg.task = metrics::Task::gleason;
  return build_index(tmp.str(), cfg);
}

}  // namespace

TEST_CASE("extraction mirrors across edges without repeating the border") {
  TempDir tmp("extract");
  const DatasetIndex index = make_dp_index(tmp, 64);
  SamplerConfig cfg;
  cfg.patch_side = 32;
  PatchSampler sampler(index, cfg);

  const IndexEntry& entry = index.entries[0];
  const RgbImage rgb = io::load_rgb(tmp.sub("images/" + entry.image_id + ".png"));
  const SixChannelImage six = preprocess::to_six_channel(rgb);

  // A corner center forces mirroring on two edges.
  const Center corner{2, 3};
  const Patch patch = sampler.extract(entry, "label", corner, 0, false, 0);
  REQUIRE(patch.pixels.height == 32);
  const int half = 16;
  for (int oy = 0; oy < 32; oy += 5)
    for (int ox = 0; ox < 32; ox += 5) {
      const int sy = testing::reflect101_oracle(corner.y - half + oy, 64);
      const int sx = testing::reflect101_oracle(corner.x - half + ox, 64);
      for (int c = 0; c < 6; ++c)
        CHECK(patch.pixels.at(oy, ox, c) == six.at(sy, sx, c));
    }
  CHECK(patch.provenance.center_y == corner.y);
  CHECK(patch.provenance.orientation == 0);
}

TEST_CASE("extraction at full production patch size stays centered") {
  TempDir tmp("extract768");
  const DatasetIndex index = make_dp_index(tmp, 128);
  SamplerConfig cfg;  // default 768 patch on a 128 image: heavy mirroring
  PatchSampler sampler(index, cfg);
  const IndexEntry& entry = index.entries[0];
  const Center center{64, 64};
  const Patch patch = sampler.extract(entry, "label", center, 0, false, 0);
  REQUIRE(patch.pixels.height == 768);
  REQUIRE(patch.pixels.width == 768);
  const RgbImage rgb = io::load_rgb(tmp.sub("images/" + entry.image_id + ".png"));
  const SixChannelImage six = preprocess::to_six_channel(rgb);
  // Center pixel of the patch is the center pixel of the image.
  for (int c = 0; c < 6; ++c)
    CHECK(patch.pixels.at(384, 384, c) == doctest::Approx(six.at(64, 64, c)));
  // Mirrored wings still hold only values present in the source image.
  const labels::ProbTarget& t = patch.target;
  REQUIRE(t.channels == 2);
  for (int y = 0; y < t.height; y += 123)
    for (int x = 0; x < t.width; x += 123) {
      const double p0 = t.at(y, x, 0), p1 = t.at(y, x, 1);
      CHECK(p0 + p1 == doctest::Approx(1.0));
      CHECK((p0 == 0.0 || p0 == 1.0));
    }
}

TEST_CASE("extraction with orientation equals orienting the flat patch") {
  TempDir tmp("extract_orient");
  const DatasetIndex index = make_dp_index(tmp, 64);
  SamplerConfig cfg;
  cfg.patch_side = 24;
  PatchSampler sampler(index, cfg);
  const IndexEntry& entry = index.entries[2];
  const Center center{30, 40};
  const Patch flat = sampler.extract(entry, "label", center, 0, false, 0);
  for (int o = 1; o < kOrientationCount; ++o) {
    const Patch turned = sampler.extract(entry, "label", center, 0, false, o);
    CHECK(turned.pixels.pixels == orient_image(o, flat.pixels).pixels);
    CHECK(turned.target.probs == orient_probs(o, flat.target).probs);
    CHECK(turned.provenance.orientation == o);
  }
}

TEST_CASE("digestpath batches follow the recipe for many draws") {
  TempDir tmp("dp_recipe");
  const DatasetIndex index = make_dp_index(tmp);
  SamplerConfig cfg;
  cfg.patch_side = 32;
  PatchSampler sampler(index, cfg);
  Rng rng(101);

  for (int i = 0; i < 300; ++i) {
    const Batch batch = sampler.sample(rng);
    REQUIRE(batch.patches.size() == kBatchSize);
    std::set<std::string> images;
    int lesion = 0, benign_pos = 0, negative = 0;
    for (const Patch& p : batch.patches) {
      images.insert(p.provenance.image_id);
      if (p.provenance.negative_image) {
        ++negative;
        CHECK(p.provenance.center_class == 0);
        CHECK(p.provenance.image_id.rfind("neg", 0) == 0);
      } else if (p.provenance.center_class == 1) {
        ++lesion;
      } else {
        ++benign_pos;
        CHECK(p.provenance.image_id.rfind("pos", 0) == 0);
      }
    }
    CHECK(images.size() == 4);
    CHECK(lesion == 2);
    CHECK(benign_pos == 1);
    CHECK(negative == 1);
  }
}

TEST_CASE("gleason batches cover all four classes on distinct images") {
  TempDir tmp("gl_recipe");
  const DatasetIndex index = make_gl_index(tmp);
  SamplerConfig cfg;
  cfg.patch_side = 32;
  cfg.label_source = LabelSource::majority_vote;
  PatchSampler sampler(index, cfg);
  Rng rng(103);

  for (int i = 0; i < 300; ++i) {
    const Batch batch = sampler.sample(rng);
    REQUIRE(batch.patches.size() == kBatchSize);
    std::set<std::string> images;
    std::set<int> classes;
    for (const Patch& p : batch.patches) {
      images.insert(p.provenance.image_id);
      classes.insert(p.provenance.center_class);
      CHECK(p.provenance.annotator_id == "majority");
    }
    CHECK(images.size() == 4);
    CHECK(classes == std::set<int>{0, 1, 2, 3});
  }
}

TEST_CASE("label sources pick the advertised annotator maps") {
  TempDir tmp("gl_sources");
  const DatasetIndex index = make_gl_index(tmp);

  SamplerConfig cfg;
  cfg.patch_side = 32;
  cfg.label_source = LabelSource::single_annotator;
  cfg.annotator_id = "bob";
  PatchSampler single(index, cfg);
  Rng rng(105);
  for (const Patch& p : single.sample(rng).patches)
    CHECK(p.provenance.annotator_id == "bob");

  cfg.label_source = LabelSource::all_annotators;
  cfg.annotator_id.clear();
  PatchSampler all(index, cfg);
  std::set<std::string> seen;
  for (int i = 0; i < 40; ++i)
    for (const Patch& p : all.sample(rng).patches)
      seen.insert(p.provenance.annotator_id);
  CHECK(seen.count("alice"));
  CHECK(seen.count("bob"));
  CHECK(seen.count("carol"));
  CHECK_FALSE(seen.count("majority"));

  cfg.label_source = LabelSource::probabilistic;
  PatchSampler prob(index, cfg);
  const Batch batch = prob.sample(rng);
  for (const Patch& p : batch.patches) {
    CHECK(p.provenance.annotator_id == "votes");
    // Vote shares: values in {0, 1/3, 2/3, 1} for three annotators.
    for (int y = 0; y < p.target.height; y += 7)
      for (int x = 0; x < p.target.width; x += 7) {
        double sum = 0;
        for (int c = 0; c < 4; ++c) {
          const double v = p.target.at(y, x, c);
          sum += v;
          CHECK(std::min({std::abs(v), std::abs(v - 1.0 / 3),
                          std::abs(v - 2.0 / 3), std::abs(v - 1.0)}) < 1e-12);
        }
        CHECK(sum == doctest::Approx(1.0));
      }
  }
}

TEST_CASE("sampling is deterministic and batches can be regenerated") {
  TempDir tmp("dp_det");
  const DatasetIndex index = make_dp_index(tmp);
  SamplerConfig cfg;
  cfg.patch_side = 32;

  PatchSampler a(index, cfg), b(index, cfg);
  Rng ra(77), rb(77);
  Batch third;
  for (int i = 0; i < 3; ++i) {
    const Batch ba = a.sample(ra);
    const Batch bb = b.sample(rb);
    REQUIRE(ba.patches.size() == bb.patches.size());
    for (std::size_t p = 0; p < ba.patches.size(); ++p) {
      CHECK(ba.patches[p].pixels.pixels == bb.patches[p].pixels.pixels);
      CHECK(ba.patches[p].provenance.image_id ==
            bb.patches[p].provenance.image_id);
    }
    third = ba;
  }
  // Rewind to the recorded state and replay the last batch.
  Rng replay(1);
  replay.set_state(third.seed_state);
  const Batch again = a.sample(replay);
  REQUIRE(again.patches.size() == third.patches.size());
  for (std::size_t p = 0; p < again.patches.size(); ++p)
    CHECK(again.patches[p].pixels.pixels == third.patches[p].pixels.pixels);
}

TEST_CASE("unsatisfiable recipes raise errors naming the shortage") {
  TempDir tmp("dp_short");
  testing::DigestpathSpec spec;
  spec.positive_images = 2;  // recipe needs three distinct positives
  spec.negative_images = 1;
  spec.side = 64;
  testing::make_digestpath_dataset(tmp.str(), spec);
  IndexConfig icfg;
  const DatasetIndex index = build_index(tmp.str(), icfg);

  SamplerConfig cfg;
  cfg.patch_side = 32;
  PatchSampler sampler(index, cfg);
  Rng rng(1);
  CHECK_THROWS_WITH_AS(sampler.sample(rng),
                       doctest::Contains("batch recipe unsatisfiable"),
                       std::runtime_error);
}

TEST_CASE("prefetched batches equal the serial sequence") {
  TempDir tmp("prefetch");
  const DatasetIndex index = make_dp_index(tmp);
  SamplerConfig cfg;
  cfg.patch_side = 32;

  PatchSampler serial(index, cfg);
  Rng rng(55);
  std::vector<Batch> expect;
  for (int i = 0; i < 6; ++i) expect.push_back(serial.sample(rng));

  PatchSampler threaded(index, cfg);
  BatchPrefetcher prefetcher(threaded, Rng(55), 3);
  for (int i = 0; i < 6; ++i) {
    const Batch got = prefetcher.next();
    REQUIRE(got.patches.size() == expect[i].patches.size());
    for (std::size_t p = 0; p < got.patches.size(); ++p) {
      CHECK(got.patches[p].pixels.pixels == expect[i].patches[p].pixels.pixels);
      CHECK(got.patches[p].target.probs == expect[i].patches[p].target.probs);
    }
  }
}
