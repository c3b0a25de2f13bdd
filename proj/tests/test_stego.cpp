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

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <set>
#include <vector>

#include "steglab/errors.hpp"
#include "steglab/image.hpp"
#include "steglab/rng.hpp"
#include "steglab/stego.hpp"

using namespace steglab;

namespace {

PixelImage random_image(int w, int h, int c, uint64_t seed) {
  Rng rng(seed);
  PixelImage img(w, h, c);
  for (auto& b : img.data) b = static_cast<uint8_t>(rng.bounded(256));
  return img;
}

// Independent re-count of what an embedding did to the sample array.
struct DiffStats {
  size_t changed = 0;
  size_t max_abs_diff = 0;
};

DiffStats diff_stats(const PixelImage& cover, const PixelImage& stego) {
  REQUIRE(cover.size() == stego.size());
  DiffStats st;
  for (size_t i = 0; i < cover.size(); ++i) {
    const int d = std::abs(int(cover.data[i]) - int(stego.data[i]));
    if (d != 0) ++st.changed;
    st.max_abs_diff = std::max(st.max_abs_diff, size_t(d));
  }
  return st;
}

}  // namespace

TEST_SUITE("stego") {

TEST_CASE("embedding is explainable sample by sample") {
  // Oracle first: re-derive the plan and verify, for every sample, either
  // "untouched" or "LSB now equals the message bit and the step was +/-1".
  const PixelImage cover = random_image(32, 32, 3, 100);
  const StegoKey key{782634};
  const size_t n_bits = capacity(cover, 0.4);
  Rng msg_rng(5);
  const BitMessage msg = random_bits(n_bits, msg_rng);
  const PixelImage stego = embed(cover, msg, key);

  const EmbedPlan plan =
      derive_plan(key, ImageShape{cover.width, cover.height, cover.channels},
                  n_bits);
  REQUIRE(plan.positions.size() == n_bits);
  std::set<uint32_t> touched;
  for (size_t i = 0; i < n_bits; ++i) {
    const uint32_t pos = plan.positions[i];
    touched.insert(pos);
    const uint8_t sv = stego.data[pos];
    const uint8_t cv = cover.data[pos];
    REQUIRE((sv & 1) == msg[i]);
    const int d = int(sv) - int(cv);
    if ((cv & 1) == msg[i]) {
      REQUIRE(d == 0);
    } else {
      REQUIRE(std::abs(d) == 1);
      // Saturated samples override the planned direction.
      if (cv == 0) {
        REQUIRE(d == 1);
      } else if (cv == 255) {
        REQUIRE(d == -1);
      } else {
        REQUIRE(plan.signs[i] == (d > 0 ? 1 : -1));
      }
    }
  }
  REQUIRE(touched.size() == n_bits);  // positions are distinct
  for (size_t i = 0; i < cover.size(); ++i)
    if (!touched.count(static_cast<uint32_t>(i)))
      REQUIRE(stego.data[i] == cover.data[i]);
}

TEST_CASE("extract inverts embed") {
  Rng seed_rng(200);
  for (int trial = 0; trial < 25; ++trial) {
    const PixelImage cover = random_image(64, 64, trial % 2 ? 1 : 3,
                                          seed_rng.next_u64());
    const StegoKey key{seed_rng.next_u64()};
    const size_t n_bits = capacity(cover, 0.4);
    Rng msg_rng(seed_rng.next_u64());
    const BitMessage msg = random_bits(n_bits, msg_rng);
    const PixelImage stego = embed(cover, msg, key);
    CHECK(extract(stego, key, n_bits) == msg);
  }
}

TEST_CASE("the wrong key reads noise") {
  const PixelImage cover = random_image(64, 64, 3, 300);
  const size_t n_bits = capacity(cover, 0.4);  // 4915 bits
  Rng msg_rng(301);
  const BitMessage msg = random_bits(n_bits, msg_rng);
  const PixelImage stego = embed(cover, msg, StegoKey{1111});
  const BitMessage wrong = extract(stego, StegoKey{2222}, n_bits);
  size_t agree = 0;
  for (size_t i = 0; i < n_bits; ++i)
    if (wrong[i] == msg[i]) ++agree;
  const double rate = double(agree) / double(n_bits);
  // Binomial(4915, 0.5) has sd ~0.007; 0.05 is a seven-sigma band.
  CHECK(rate > 0.45);
  CHECK(rate < 0.55);
}

TEST_CASE("capacity matches the floor formula") {
  CHECK(capacity(PixelImage(64, 64, 1), 0.4) == 1638);
  CHECK(capacity(PixelImage(64, 64, 3), 0.4) == 4915);
  CHECK(capacity(PixelImage(64, 64, 1), 1.0) == 4096);
  CHECK(capacity(PixelImage(10, 10, 1), 0.999) == 99);
  CHECK(capacity(PixelImage(1, 1, 1), 0.4) == 0);
  CHECK_THROWS_AS((void)capacity(PixelImage(64, 64, 1), 0.0), usage_error);
  CHECK_THROWS_AS((void)capacity(PixelImage(64, 64, 1), 1.5), usage_error);
  CHECK_THROWS_AS((void)capacity(PixelImage(64, 64, 1), -0.4), usage_error);
}

TEST_CASE("saturated samples step inward") {
  PixelImage cover(16, 16, 1);
  for (size_t i = 0; i < cover.size(); ++i)
    cover.data[i] = (i % 2) ? 255 : 0;
  const StegoKey key{9};
  const size_t n_bits = capacity(cover, 1.0);
  Rng msg_rng(10);
  const BitMessage msg = random_bits(n_bits, msg_rng);
  const PixelImage stego = embed(cover, msg, key);
  for (size_t i = 0; i < stego.size(); ++i) {
    const int d = int(stego.data[i]) - int(cover.data[i]);
    if (cover.data[i] == 0) CHECK((d == 0 || d == 1));
    if (cover.data[i] == 255) CHECK((d == 0 || d == -1));
  }
  CHECK(extract(stego, key, n_bits) == msg);
}

TEST_CASE("embedding changes about payload/2 of the samples") {
  // A random cover LSB already matches the bit half the time.
  double total_fraction = 0;
  const int n_images = 100;
  Rng seed_rng(400);
  for (int i = 0; i < n_images; ++i) {
    const PixelImage cover = random_image(64, 64, 3, seed_rng.next_u64());
    const size_t n_bits = capacity(cover, 0.4);
    Rng msg_rng(seed_rng.next_u64());
    const BitMessage msg = random_bits(n_bits, msg_rng);
    const PixelImage stego = embed(cover, msg, StegoKey{seed_rng.next_u64()});
    const DiffStats st = diff_stats(cover, stego);
    CHECK(st.max_abs_diff <= 1);
    total_fraction += double(st.changed) / double(cover.size());
  }
  CHECK(std::abs(total_fraction / n_images - 0.20) < 0.02);
}

TEST_CASE("embed validates message length") {
  const PixelImage cover = random_image(8, 8, 1, 500);
  const BitMessage too_long(cover.size() + 1, 0);
  CHECK_THROWS_AS((void)embed(cover, too_long, StegoKey{1}), usage_error);
}

TEST_CASE("embedding is deterministic in key and message") {
  const PixelImage cover = random_image(32, 32, 3, 600);
  Rng msg_rng(601);
  const BitMessage msg = random_bits(capacity(cover, 0.4), msg_rng);
  const PixelImage a = embed(cover, msg, StegoKey{77});
  const PixelImage b = embed(cover, msg, StegoKey{77});
  const PixelImage c = embed(cover, msg, StegoKey{78});
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("stego_batch is a quantized +/-1 edit in tensor space") {
  std::vector<PixelImage> covers;
  Rng seed_rng(700);
  const int n = 8;
  for (int i = 0; i < n; ++i)
    covers.push_back(random_image(32, 32, 1, seed_rng.next_u64()));
  const ImageTensor t = to_tensor(covers);

  Rng rng(11);
  const ImageTensor out = stego_batch(t, 0.4, KeyPolicy::per_image_key, rng);
  REQUIRE(out.same_shape(t));
  const auto stegos = from_tensor(out);
  const size_t per_image = covers[0].size();
  const size_t cap = capacity(covers[0], 0.4);
  for (int i = 0; i < n; ++i) {
    const DiffStats st = diff_stats(covers[i], stegos[i]);
    CHECK(st.max_abs_diff <= 1);
    CHECK(st.changed <= cap);
    CHECK(st.changed > cap / 3);  // roughly half the plan positions move
  }

  // Same rng state replays the identical batch.
  Rng rng2(11);
  const ImageTensor again =
      stego_batch(t, 0.4, KeyPolicy::per_image_key, rng2);
  CHECK(again.v == out.v);

  // Fixed key: one plan for the whole batch, so the union of changed
  // positions stays inside one capacity-sized set. Per-image keys spread
  // changes across the full sample range.
  Rng rng3(12);
  const auto fixed_stegos =
      from_tensor(stego_batch(t, 0.4, KeyPolicy::fixed_key, rng3));
  std::set<size_t> fixed_union, per_union;
  for (int i = 0; i < n; ++i)
    for (size_t s = 0; s < per_image; ++s) {
      if (fixed_stegos[i].data[s] != covers[i].data[s]) fixed_union.insert(s);
      if (stegos[i].data[s] != covers[i].data[s]) per_union.insert(s);
    }
  CHECK(fixed_union.size() <= cap);
  CHECK(per_union.size() > cap);
}

TEST_CASE("bit packing is MSB first") {
  const std::vector<uint8_t> bytes{0b10110001, 0b01000000};
  const BitMessage bits = bytes_to_bits(bytes);
  const BitMessage expect{1, 0, 1, 1, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0};
  CHECK(bits == expect);
  CHECK(bits_to_bytes(bits) == bytes);
  // Partial byte pads with zero bits on the right.
  const BitMessage three{1, 1, 0};
  CHECK(bits_to_bytes(three) == std::vector<uint8_t>{0b11000000});
}

TEST_CASE("random_bits draws only zeros and ones, both present") {
  Rng rng(800);
  const BitMessage bits = random_bits(4096, rng);
  size_t ones = 0;
  for (uint8_t b : bits) {
    REQUIRE((b == 0 || b == 1));
    ones += b;
  }
  CHECK(ones > 1800);
  CHECK(ones < 2300);
}

}  // TEST_SUITE
