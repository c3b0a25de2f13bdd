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

#include "steglab/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "steglab/errors.hpp"

namespace steglab {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

// libpng reports errors via longjmp; error_msg carries the text out of the
// handler so it can be rethrown as a C++ exception after cleanup.
struct PngErrorCtx {
  std::string msg;
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngErrorCtx*>(png_get_error_ptr(png));
  if (ctx) ctx->msg = msg;
  longjmp(png_jmpbuf(png), 1);
}

void png_warn_fn(png_structp, png_const_charp) {}

}  // namespace

PixelImage load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw data_error("load_png: cannot open file: " + path);

  uint8_t sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw data_error("load_png: not a PNG file: " + path);

  PngErrorCtx err;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warn_fn);
  if (!png) throw data_error("load_png: libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw data_error("load_png: libpng init failed");
  }

  std::vector<uint8_t> pixels;
  std::vector<png_bytep> rows;
  int width = 0, height = 0, channels = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw data_error("load_png: malformed PNG (" + path + "): " + err.msg);
  }

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  if (bit_depth > 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw data_error("load_png: unsupported bit depth " + std::to_string(bit_depth) +
                     " (only 8-bit PNGs are accepted): " + path);
  }

  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
    png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw data_error("load_png: unsupported channel count " +
                     std::to_string(channels) + ": " + path);
  }

  pixels.resize(static_cast<size_t>(width) * height * channels);
  rows.resize(height);
  const size_t stride = static_cast<size_t>(width) * channels;
  for (int y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  PixelImage img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.data = std::move(pixels);
  return img;
}

void save_png(const PixelImage& img, const std::string& path) {
  if (img.width <= 0 || img.height <= 0)
    throw usage_error("save_png: invalid dimensions " + std::to_string(img.width) +
                      "x" + std::to_string(img.height));
  if (img.channels != 1 && img.channels != 3)
    throw usage_error("save_png: channels must be 1 or 3, got " +
                      std::to_string(img.channels));
  if (img.data.size() != static_cast<size_t>(img.width) * img.height * img.channels)
    throw usage_error("save_png: data length does not match dimensions");

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw data_error("save_png: cannot open for writing: " + path);

  PngErrorCtx err;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warn_fn);
  if (!png) throw data_error("save_png: libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw data_error("save_png: libpng init failed");
  }

  std::vector<png_bytep> rows(img.height);
  const size_t stride = static_cast<size_t>(img.width) * img.channels;
  for (int y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(img.data.data() + y * stride);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw data_error("save_png: write failed (" + path + "): " + err.msg);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

PixelImage center_crop(const PixelImage& img, int size) {
  if (size <= 0) throw usage_error("center_crop: size must be positive");
  if (img.width < size || img.height < size)
    throw data_error("center_crop: image " + std::to_string(img.width) + "x" +
                     std::to_string(img.height) + " smaller than crop size " +
                     std::to_string(size));
  const int x0 = (img.width - size) / 2;
  const int y0 = (img.height - size) / 2;
  PixelImage out(size, size, img.channels);
  const size_t row_bytes = static_cast<size_t>(size) * img.channels;
  for (int y = 0; y < size; ++y) {
    const uint8_t* src =
        img.data.data() +
        (static_cast<size_t>(y0 + y) * img.width + x0) * img.channels;
    std::memcpy(out.data.data() + static_cast<size_t>(y) * row_bytes, src, row_bytes);
  }
  return out;
}

PixelImage to_grayscale(const PixelImage& img) {
  if (img.channels == 1) return img;
  PixelImage out(img.width, img.height, 1);
  const size_t npix = static_cast<size_t>(img.width) * img.height;
  for (size_t i = 0; i < npix; ++i) {
    const double r = img.data[i * 3 + 0];
    const double g = img.data[i * 3 + 1];
    const double b = img.data[i * 3 + 2];
    double y = std::round(0.299 * r + 0.587 * g + 0.114 * b);
    if (y < 0.0) y = 0.0;
    if (y > 255.0) y = 255.0;
    out.data[i] = static_cast<uint8_t>(y);
  }
  return out;
}

ImageTensor to_tensor(const std::vector<PixelImage>& imgs) {
  if (imgs.empty()) return ImageTensor();
  const int w = imgs[0].width, h = imgs[0].height, c = imgs[0].channels;
  for (const auto& im : imgs)
    if (im.width != w || im.height != h || im.channels != c)
      throw usage_error("to_tensor: images have heterogeneous shapes");

  ImageTensor t(static_cast<int>(imgs.size()), c, h, w);
  for (size_t i = 0; i < imgs.size(); ++i) {
    const PixelImage& im = imgs[i];
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          t.at(static_cast<int>(i), ch, y, x) =
              static_cast<double>(im.at(x, y, ch)) / 127.5 - 1.0;
  }
  return t;
}

std::vector<PixelImage> from_tensor(const ImageTensor& t) {
  if (!t.all_finite())
    throw numeric_error("from_tensor: tensor contains non-finite values");
  std::vector<PixelImage> out;
  out.reserve(t.n);
  for (int i = 0; i < t.n; ++i) {
    PixelImage im(t.w, t.h, t.c);
    for (int ch = 0; ch < t.c; ++ch)
      for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x) {
          double v = std::round((t.at(i, ch, y, x) + 1.0) * 127.5);
          if (v < 0.0) v = 0.0;
          if (v > 255.0) v = 255.0;
          im.at(x, y, ch) = static_cast<uint8_t>(v);
        }
    out.push_back(std::move(im));
  }
  return out;
}

}  // namespace steglab
