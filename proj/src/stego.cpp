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

#include "steglab/stego.hpp"

#include <cmath>
#include <numeric>

#include "steglab/errors.hpp"

namespace steglab {

size_t capacity(const PixelImage& img, double payload_bpp) {
  if (!(payload_bpp > 0.0 && payload_bpp <= 1.0))
    throw usage_error("capacity: payload must be in (0, 1], got " +
                      std::to_string(payload_bpp));
  const double samples =
      static_cast<double>(img.width) * img.height * img.channels;
  return static_cast<size_t>(std::floor(samples * payload_bpp));
}

EmbedPlan derive_plan(StegoKey key, const ImageShape& shape, size_t n_bits) {
  const size_t total = shape.samples();
  if (n_bits > total)
    throw usage_error("derive_plan: " + std::to_string(n_bits) +
                      " bits exceed " + std::to_string(total) + " samples");

  Rng rng(key.seed);
  std::vector<uint32_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0u);
  rng.shuffle_prefix(idx, n_bits);
  idx.resize(n_bits);

  EmbedPlan plan;
  plan.positions = std::move(idx);
  plan.signs.resize(n_bits);
  for (size_t i = 0; i < n_bits; ++i)
    plan.signs[i] = rng.coin() ? int8_t{1} : int8_t{-1};
  return plan;
}

PixelImage embed(const PixelImage& cover, const BitMessage& msg, StegoKey key) {
  const ImageShape shape{cover.width, cover.height, cover.channels};
  if (msg.size() > shape.samples())
    throw usage_error("embed: message of " + std::to_string(msg.size()) +
                      " bits exceeds " + std::to_string(shape.samples()) +
                      " samples");
  const EmbedPlan plan = derive_plan(key, shape, msg.size());

  PixelImage stego = cover;
  for (size_t j = 0; j < msg.size(); ++j) {
    const uint32_t pos = plan.positions[j];
    const uint8_t bit = msg[j] & 1;
    const uint8_t p = stego.data[pos];
    if ((p & 1) == bit) continue;
    if (p == 0)
      stego.data[pos] = 1;
    else if (p == 255)
      stego.data[pos] = 254;
    else
      stego.data[pos] = static_cast<uint8_t>(static_cast<int>(p) + plan.signs[j]);
  }
  return stego;
}

BitMessage extract(const PixelImage& stego, StegoKey key, size_t n_bits) {
  const ImageShape shape{stego.width, stego.height, stego.channels};
  if (n_bits > shape.samples())
    throw usage_error("extract: " + std::to_string(n_bits) + " bits exceed " +
                      std::to_string(shape.samples()) + " samples");
  const EmbedPlan plan = derive_plan(key, shape, n_bits);
  BitMessage bits(n_bits);
  for (size_t j = 0; j < n_bits; ++j)
    bits[j] = stego.data[plan.positions[j]] & 1;
  return bits;
}

ImageTensor stego_batch(const ImageTensor& t, double payload_bpp,
                        KeyPolicy policy, Rng& rng) {
  std::vector<PixelImage> imgs = from_tensor(t);
  StegoKey batch_key{rng.next_u64()};
  for (auto& img : imgs) {
    const size_t n_bits = capacity(img, payload_bpp);
    const BitMessage bits = random_bits(n_bits, rng);
    const StegoKey key =
        policy == KeyPolicy::fixed_key ? batch_key : StegoKey{rng.next_u64()};
    img = embed(img, bits, key);
  }
  return to_tensor(imgs);
}

BitMessage random_bits(size_t n, Rng& rng) {
  BitMessage bits(n);
  for (size_t i = 0; i < n; ++i) bits[i] = rng.coin() ? 1 : 0;
  return bits;
}

BitMessage bytes_to_bits(const std::vector<uint8_t>& bytes) {
  BitMessage bits;
  bits.reserve(bytes.size() * 8);
  for (uint8_t b : bytes)
    for (int k = 7; k >= 0; --k) bits.push_back((b >> k) & 1);
  return bits;
}

std::vector<uint8_t> bits_to_bytes(const BitMessage& bits) {
  std::vector<uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i] & 1) bytes[i / 8] |= static_cast<uint8_t>(1u << (7 - i % 8));
  return bytes;
}

}  // namespace steglab
