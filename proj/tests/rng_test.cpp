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
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "histoseg/rng.hpp"

using histoseg::Rng;
using histoseg::fnv1a64;

TEST_CASE("deterministic across instances with the same seed") {
  Rng a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u32() == b.next_u32());
}

TEST_CASE("streams with different sequence ids diverge") {
  Rng a(42, 1), b(42, 2);
  int same = 0;
  for (int i = 0; i < 256; ++i) same += a.next_u32() == b.next_u32();
  CHECK(same < 4);
}

TEST_CASE("state round-trip resumes the exact sequence") {
  Rng a(9, 3);
  for (int i = 0; i < 37; ++i) a.next_u32();
  const Rng::State snap = a.state();
  std::vector<std::uint32_t> expect;
  for (int i = 0; i < 64; ++i) expect.push_back(a.next_u32());

  Rng b(1, 1);
  b.set_state(snap);
  for (int i = 0; i < 64; ++i) CHECK(b.next_u32() == expect[i]);
}

TEST_CASE("state round-trip preserves the cached gaussian spare") {
  Rng a(5);
  (void)a.normal();  // leaves one spare cached
  Rng b(1);
  b.set_state(a.state());
  CHECK(a.normal() == b.normal());
  CHECK(a.normal() == b.normal());
}

TEST_CASE("uniform_int stays in range and hits every value") {
  Rng rng(3);
  std::vector<int> hits(13, 0);
  for (int i = 0; i < 5000; ++i) {
    const std::uint32_t v = rng.uniform_int(13);
    REQUIRE(v < 13);
    hits[v] += 1;
  }
  CHECK(*std::min_element(hits.begin(), hits.end()) > 0);
}

TEST_CASE("uniform_int is close to unbiased over a non-power-of-two bound") {
  Rng rng(17);
  const int bound = 3, draws = 90000;
  std::vector<int> hits(bound, 0);
  for (int i = 0; i < draws; ++i) hits[rng.uniform_int(bound)] += 1;
  for (int c = 0; c < bound; ++c)
    CHECK(std::abs(hits[c] - draws / bound) < draws / bound / 20);
}

TEST_CASE("uniform lies in [0,1) with a sane mean") {
  Rng rng(23);
  double sum = 0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 20000 - 0.5) < 0.01);
}

TEST_CASE("normal has approximately unit variance and zero mean") {
  Rng rng(29);
  double sum = 0, sq = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("shuffle is a permutation and seed-stable") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  Rng a(31);
  a.shuffle(v);
  std::vector<int> w = v;
  std::sort(w.begin(), w.end());
  for (int i = 0; i < 50; ++i) CHECK(w[i] == i);

  std::vector<int> u(50);
  std::iota(u.begin(), u.end(), 0);
  Rng b(31);
  b.shuffle(u);
  CHECK(u == v);
}

TEST_CASE("fnv1a64 matches published test vectors") {
  CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar", 6) == 0x85944171f73967e8ull);
}
