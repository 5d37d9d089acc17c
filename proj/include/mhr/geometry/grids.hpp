// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>

#include <vector>

namespace mhr {

// Planar (channel-major) 2D feature grid, shape C x H x W.
template <class T>
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<T> data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w)
      : channels(c), height(h), width(w),
        data(static_cast<size_t>(c) * h * w, T(0)) {}

  T& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  T at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  size_t plane() const { return static_cast<size_t>(height) * width; }
};

// Planar 3D feature grid, shape C x Z x Y x X (camera-frame z/y/x axes).
template <class T>
struct VoxelGrid {
  int channels = 0;
  int nz = 0, ny = 0, nx = 0;
  std::vector<T> data;

  VoxelGrid() = default;
  VoxelGrid(int c, int z, int y, int x)
      : channels(c), nz(z), ny(y), nx(x),
        data(static_cast<size_t>(c) * z * y * x, T(0)) {}

  T& at(int c, int z, int y, int x) {
    return data[((static_cast<size_t>(c) * nz + z) * ny + y) * nx + x];
  }
  T at(int c, int z, int y, int x) const {
    return data[((static_cast<size_t>(c) * nz + z) * ny + y) * nx + x];
  }
  size_t cells() const { return static_cast<size_t>(nz) * ny * nx; }
};

}  // namespace mhr
