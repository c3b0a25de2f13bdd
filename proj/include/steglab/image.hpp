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

#ifndef STEGLAB_IMAGE_HPP
#define STEGLAB_IMAGE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "steglab/tensor.hpp"

namespace steglab {

/// 8-bit image, row-major, channel-interleaved. channels is 1 or 3.
struct PixelImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> data;

  PixelImage() = default;
  PixelImage(int w, int h, int c)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, 0) {}

  size_t size() const { return data.size(); }

  uint8_t& at(int x, int y, int ch) {
    return data[(static_cast<size_t>(y) * width + x) * channels + ch];
  }
  uint8_t at(int x, int y, int ch) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + ch];
  }

  bool operator==(const PixelImage& o) const {
    return width == o.width && height == o.height && channels == o.channels &&
           data == o.data;
  }
};

/// Reads an 8-bit PNG (grayscale or RGB). Palette images are expanded,
/// alpha is stripped. 16-bit files are rejected as unsupported depth.
PixelImage load_png(const std::string& path);

/// Writes img as an 8-bit PNG. Round-trips bit exactly through load_png.
void save_png(const PixelImage& img, const std::string& path);

/// Central size x size window; offsets are floor((dim - size) / 2).
PixelImage center_crop(const PixelImage& img, int size);

/// Integer luma conversion: round(0.299 R + 0.587 G + 0.114 B).
PixelImage to_grayscale(const PixelImage& img);

/// Pixel p maps to p / 127.5 - 1. All images must share one shape.
ImageTensor to_tensor(const std::vector<PixelImage>& imgs);

/// Value v maps to clamp(round((v + 1) * 127.5), 0, 255); rounding is
/// half away from zero. Rejects non-finite values.
std::vector<PixelImage> from_tensor(const ImageTensor& t);

}  // namespace steglab

#endif
