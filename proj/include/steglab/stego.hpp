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

#ifndef STEGLAB_STEGO_HPP
#define STEGLAB_STEGO_HPP

#include <cstdint>
#include <vector>

#include "steglab/image.hpp"
#include "steglab/rng.hpp"

namespace steglab {

/// Payload bits, each element 0 or 1.
using BitMessage = std::vector<uint8_t>;

/// Shared embedding key; drives keyed pixel-position selection.
struct StegoKey {
  uint64_t seed = 0;
};

/// Keyed embedding schedule: which samples to touch and, when a change is
/// needed, whether to add or subtract 1.
struct EmbedPlan {
  std::vector<uint32_t> positions;  // indices into the flat sample array
  std::vector<int8_t> signs;        // +1 or -1, same length as positions
};

/// floor(width * height * channels * payload) message bits fit at the
/// given payload (bits per channel sample). payload must be in (0, 1].
size_t capacity(const PixelImage& img, double payload_bpp);

struct ImageShape {
  int width = 0;
  int height = 0;
  int channels = 0;
  size_t samples() const {
    return static_cast<size_t>(width) * height * channels;
  }
};

/// Deterministic function of (key, shape, n_bits). Positions are the first
/// n_bits entries of a key-seeded uniform permutation of all sample indices
/// (partial Fisher-Yates); the sign stream continues from the same
/// generator. See rng.hpp for the fixed generator family.
EmbedPlan derive_plan(StegoKey key, const ImageShape& shape, size_t n_bits);

/// LSB matching: where the cover LSB already equals the message bit the
/// sample is untouched; otherwise 1 is added or subtracted per the plan's
/// sign, except that 0 forces +1 and 255 forces -1.
PixelImage embed(const PixelImage& cover, const BitMessage& msg, StegoKey key);

/// Reads bit j as LSB(stego[positions[j]]) under the plan for
/// (key, shape, n_bits).
BitMessage extract(const PixelImage& stego, StegoKey key, size_t n_bits);

enum class KeyPolicy { fixed_key, per_image_key };

/// Quantizes each image, embeds fresh uniform bits at the payload under the
/// key policy, and converts back to the real-valued domain. Keys and bits
/// are drawn from rng; the fixed-key policy draws one key per call.
ImageTensor stego_batch(const ImageTensor& t, double payload_bpp,
                        KeyPolicy policy, Rng& rng);

BitMessage random_bits(size_t n, Rng& rng);

/// Bytes to bits, most significant bit first.
BitMessage bytes_to_bits(const std::vector<uint8_t>& bytes);

/// Bits to bytes, MSB first; a trailing partial byte is zero-padded.
std::vector<uint8_t> bits_to_bytes(const BitMessage& bits);

}  // namespace steglab

#endif
