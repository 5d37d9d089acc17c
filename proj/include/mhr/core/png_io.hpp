// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/image.hpp>

#include <png.h>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace mhr {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline void png_read_raw(const std::string& path, int& width, int& height, int& channels,
                         std::vector<std::uint8_t>& bytes) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw ValidationError("cannot open PNG: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  MHR_CHECK(png);
  png_infop info = png_create_info_struct(png);
  MHR_CHECK(info);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ValidationError("failed to decode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  png_byte color = png_get_color_type(png, info);
  png_byte depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  channels = static_cast<int>(png_get_channels(png, info));
  size_t rowbytes = png_get_rowbytes(png, info);
  bytes.resize(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = bytes.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
}

inline void png_write_raw(const std::string& path, int width, int height, int channels,
                          const std::vector<std::uint8_t>& bytes) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw ValidationError("cannot write PNG: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  MHR_CHECK(png);
  png_infop info = png_create_info_struct(png);
  MHR_CHECK(info);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed to encode PNG: " + path);
  }
  png_init_io(png, fp.get());
  int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, width, height, 8, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  // Fixed compression settings keep regeneration byte-identical.
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  std::vector<png_bytep> rows(height);
  size_t rowbytes = static_cast<size_t>(width) * channels;
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(bytes.data() + rowbytes * y);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

inline Image load_image_png(const std::string& path) {
  int w, h, c;
  std::vector<std::uint8_t> bytes;
  detail::png_read_raw(path, w, h, c, bytes);
  Image img(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const std::uint8_t* src = &bytes[(static_cast<size_t>(v) * w + u) * c];
      float* dst = img.pixel(u, v);
      if (c == 1) {
        dst[0] = dst[1] = dst[2] = src[0] / 255.f;
      } else {
        dst[0] = src[0] / 255.f;
        dst[1] = src[1] / 255.f;
        dst[2] = src[2] / 255.f;
      }
    }
  return img;
}

inline void save_image_png(const std::string& path, const Image& img) {
  std::vector<std::uint8_t> bytes(static_cast<size_t>(img.width) * img.height * 3);
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = quantize8(img.rgb[i]);
  detail::png_write_raw(path, img.width, img.height, 3, bytes);
}

inline Mask load_mask_png(const std::string& path) {
  int w, h, c;
  std::vector<std::uint8_t> bytes;
  detail::png_read_raw(path, w, h, c, bytes);
  Mask mask(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      mask.at(u, v) = bytes[(static_cast<size_t>(v) * w + u) * c] >= 128 ? 1 : 0;
  return mask;
}

inline void save_mask_png(const std::string& path, const Mask& mask) {
  std::vector<std::uint8_t> bytes(static_cast<size_t>(mask.width) * mask.height);
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.on[i] ? 255 : 0;
  detail::png_write_raw(path, mask.width, mask.height, 1, bytes);
}

}  // namespace mhr
