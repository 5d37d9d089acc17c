// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace mhr {

// Interleaved RGB image, values in [0,1], row-major, pixel (u,v) = (col,row).
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;  // height*width*3

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<size_t>(w) * h * 3, 0.f) {}

  float* pixel(int u, int v) { return &rgb[(static_cast<size_t>(v) * width + u) * 3]; }
  const float* pixel(int u, int v) const {
    return &rgb[(static_cast<size_t>(v) * width + u) * 3];
  }
  bool contains(int u, int v) const { return u >= 0 && u < width && v >= 0 && v < height; }
};

// Binary foreground mask. 1 = subject, 0 = background.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> on;  // height*width

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), on(static_cast<size_t>(w) * h, 0) {}

  std::uint8_t& at(int u, int v) { return on[static_cast<size_t>(v) * width + u]; }
  std::uint8_t at(int u, int v) const { return on[static_cast<size_t>(v) * width + u]; }
};

inline Image apply_mask(const Image& img, const Mask& mask) {
  MHR_CHECK_MSG(img.width == mask.width && img.height == mask.height,
                "image/mask size mismatch");
  Image out = img;
  for (int v = 0; v < img.height; ++v)
    for (int u = 0; u < img.width; ++u)
      if (!mask.at(u, v)) {
        float* p = out.pixel(u, v);
        p[0] = p[1] = p[2] = 0.f;
      }
  return out;
}

inline std::uint8_t quantize8(float x) {
  float q = std::round(std::clamp(x, 0.f, 1.f) * 255.f);
  return static_cast<std::uint8_t>(q);
}

// 2x2 box downsample; used to score half-resolution renders against
// full-resolution ground truth.
inline Image downsample2(const Image& img) {
  MHR_CHECK(img.width % 2 == 0 && img.height % 2 == 0);
  Image out(img.width / 2, img.height / 2);
  for (int v = 0; v < out.height; ++v)
    for (int u = 0; u < out.width; ++u)
      for (int c = 0; c < 3; ++c) {
        float s = img.pixel(2 * u, 2 * v)[c] + img.pixel(2 * u + 1, 2 * v)[c] +
                  img.pixel(2 * u, 2 * v + 1)[c] + img.pixel(2 * u + 1, 2 * v + 1)[c];
        out.pixel(u, v)[c] = 0.25f * s;
      }
  return out;
}

}  // namespace mhr
