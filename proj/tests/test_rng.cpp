/*
 * Copyright 2026 The steglab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "steglab/rng.hpp"

using namespace steglab;

TEST_SUITE("rng") {

TEST_CASE("same seed reproduces the sequence") {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("nearby seeds decorrelate") {
  // splitmix64 initialization should keep seed k and k+1 unrelated.
  Rng a(1), b(2);
  int agree = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++agree;
  CHECK(agree == 0);
}

TEST_CASE("streams with different tags are distinct") {
  Rng a = Rng::stream(7, rng_tag::init_g);
  Rng b = Rng::stream(7, rng_tag::init_d);
  Rng c = Rng::stream(7, rng_tag::init_g);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i) {
    const uint64_t x = a.next_u64();
    const uint64_t y = b.next_u64();
    if (x != y) all_equal = false;
    CHECK(x == c.next_u64());
  }
  CHECK_FALSE(all_equal);
}

TEST_CASE("uniform lies in [0,1) with a sane mean") {
  Rng rng(42);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("uniform_sym lies in [-1,1)") {
  Rng rng(43);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform_sym();
    REQUIRE(u >= -1.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n) < 0.02);
}

TEST_CASE("bounded draws are in range and hit every value") {
  Rng rng(44);
  std::vector<int> hits(13, 0);
  for (int i = 0; i < 20000; ++i) {
    const uint64_t v = rng.bounded(13);
    REQUIRE(v < 13);
    ++hits[static_cast<size_t>(v)];
  }
  // Expected count ~1538 per bucket; demand each within a generous band.
  for (int h : hits) CHECK(h > 1200);
  for (int h : hits) CHECK(h < 1900);
}

TEST_CASE("bounded(1) is always zero") {
  Rng rng(45);
  for (int i = 0; i < 100; ++i) CHECK(rng.bounded(1) == 0);
}

TEST_CASE("normal has unit variance and zero mean") {
  Rng rng(46);
  const int n = 200000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    REQUIRE(std::isfinite(x));
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("coin is roughly fair") {
  Rng rng(47);
  int heads = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    if (rng.coin()) ++heads;
  CHECK(std::abs(heads / static_cast<double>(n) - 0.5) < 0.01);
}

TEST_CASE("shuffle preserves the multiset") {
  Rng rng(48);
  std::vector<int> v(257);
  std::iota(v.begin(), v.end(), 0);
  const std::vector<int> orig = v;
  rng.shuffle(v);
  CHECK(v != orig);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == orig);
}

TEST_CASE("shuffle_prefix matches the full shuffle's prefix") {
  // The embed-plan derivation depends on this truncation property.
  std::vector<int> full(100), part(100);
  std::iota(full.begin(), full.end(), 0);
  std::iota(part.begin(), part.end(), 0);
  Rng a(49), b(49);
  a.shuffle(full);
  b.shuffle_prefix(part, 17);
  for (size_t i = 0; i < 17; ++i) CHECK(part[i] == full[i]);
}

TEST_CASE("shuffle_prefix yields distinct in-range elements") {
  Rng rng(50);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<uint32_t> v(64);
    std::iota(v.begin(), v.end(), 0u);
    rng.shuffle_prefix(v, 20);
    std::set<uint32_t> seen(v.begin(), v.begin() + 20);
    CHECK(seen.size() == 20);
    for (uint32_t x : seen) CHECK(x < 64);
  }
}

TEST_CASE("prefix selection is close to uniform over elements") {
  // Each element should land in a k-prefix with probability k/n.
  const size_t n = 40, k = 10;
  const int trials = 20000;
  std::vector<int> count(n, 0);
  Rng rng(51);
  for (int t = 0; t < trials; ++t) {
    std::vector<size_t> v(n);
    std::iota(v.begin(), v.end(), size_t{0});
    rng.shuffle_prefix(v, k);
    for (size_t i = 0; i < k; ++i) ++count[v[i]];
  }
  const double expected = trials * static_cast<double>(k) / n;  // 5000
  for (int c : count) CHECK(std::abs(c - expected) < 0.1 * expected);
}

TEST_CASE("splitmix64 walks deterministically") {
  uint64_t s1 = 99, s2 = 99;
  for (int i = 0; i < 10; ++i) CHECK(splitmix64(s1) == splitmix64(s2));
  CHECK(s1 == s2);
  CHECK(s1 != 99);
}

}  // TEST_SUITE
