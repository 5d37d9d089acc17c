// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/geometry/grids.hpp>

#include <cmath>

namespace mhr {

// Sampling policy: integer coordinates sit on texel/voxel centers, reads
// outside the grid contribute zero (border-zero, not edge-clamp). Taps are
// shared between forward interpolation and gradient scatter.

struct BilinearTaps {
  long index[4] = {-1, -1, -1, -1};  // spatial offsets into one channel plane
  double weight[4] = {0, 0, 0, 0};
};

inline BilinearTaps bilinear_taps(int width, int height, double x, double y) {
  BilinearTaps taps;
  double fx = std::floor(x), fy = std::floor(y);
  int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  double ax = x - fx, ay = y - fy;
  const double w[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
  const int dx[4] = {0, 1, 0, 1};
  const int dy[4] = {0, 0, 1, 1};
  for (int k = 0; k < 4; ++k) {
    int xi = x0 + dx[k], yi = y0 + dy[k];
    if (xi < 0 || xi >= width || yi < 0 || yi >= height) continue;
    taps.index[k] = static_cast<long>(yi) * width + xi;
    taps.weight[k] = w[k];
  }
  return taps;
}

// C-vector sample of `map` at image coordinates (u,v) scaled onto the grid
// (grid coords = uv * scale).
template <class T>
inline void bilinear_sample(const FeatureMap<T>& map, double u, double v, double scale,
                            T* out) {
  BilinearTaps taps = bilinear_taps(map.width, map.height, u * scale, v * scale);
  const size_t plane = map.plane();
  for (int c = 0; c < map.channels; ++c) out[c] = T(0);
  for (int k = 0; k < 4; ++k) {
    if (taps.index[k] < 0) continue;
    const T w = static_cast<T>(taps.weight[k]);
    const T* src = map.data.data() + taps.index[k];
    for (int c = 0; c < map.channels; ++c) out[c] += w * src[c * plane];
  }
}

template <class T>
inline void bilinear_scatter(FeatureMap<T>& grad_map, const BilinearTaps& taps,
                             const T* grad_out) {
  const size_t plane = grad_map.plane();
  for (int k = 0; k < 4; ++k) {
    if (taps.index[k] < 0) continue;
    const T w = static_cast<T>(taps.weight[k]);
    T* dst = grad_map.data.data() + taps.index[k];
    for (int c = 0; c < grad_map.channels; ++c) dst[c * plane] += w * grad_out[c];
  }
}

struct TrilinearTaps {
  long index[8] = {-1, -1, -1, -1, -1, -1, -1, -1};
  double weight[8] = {0, 0, 0, 0, 0, 0, 0, 0};
};

inline TrilinearTaps trilinear_taps(int nx, int ny, int nz, double x, double y, double z) {
  TrilinearTaps taps;
  double fx = std::floor(x), fy = std::floor(y), fz = std::floor(z);
  int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy), z0 = static_cast<int>(fz);
  double ax = x - fx, ay = y - fy, az = z - fz;
  for (int k = 0; k < 8; ++k) {
    int dx = k & 1, dy = (k >> 1) & 1, dz = (k >> 2) & 1;
    int xi = x0 + dx, yi = y0 + dy, zi = z0 + dz;
    if (xi < 0 || xi >= nx || yi < 0 || yi >= ny || zi < 0 || zi >= nz) continue;
    taps.index[k] = (static_cast<long>(zi) * ny + yi) * nx + xi;
    taps.weight[k] = (dx ? ax : 1 - ax) * (dy ? ay : 1 - ay) * (dz ? az : 1 - az);
  }
  return taps;
}

// C-vector sample of `grid` at continuous voxel coordinates (x,y,z).
template <class T>
inline void trilinear_sample(const VoxelGrid<T>& grid, double x, double y, double z,
                             T* out) {
  TrilinearTaps taps = trilinear_taps(grid.nx, grid.ny, grid.nz, x, y, z);
  const size_t cells = grid.cells();
  for (int c = 0; c < grid.channels; ++c) out[c] = T(0);
  for (int k = 0; k < 8; ++k) {
    if (taps.index[k] < 0) continue;
    const T w = static_cast<T>(taps.weight[k]);
    const T* src = grid.data.data() + taps.index[k];
    for (int c = 0; c < grid.channels; ++c) out[c] += w * src[c * cells];
  }
}

template <class T>
inline void trilinear_scatter(VoxelGrid<T>& grad_grid, const TrilinearTaps& taps,
                              const T* grad_out) {
  const size_t cells = grad_grid.cells();
  for (int k = 0; k < 8; ++k) {
    if (taps.index[k] < 0) continue;
    const T w = static_cast<T>(taps.weight[k]);
    T* dst = grad_grid.data.data() + taps.index[k];
    for (int c = 0; c < grad_grid.channels; ++c) dst[c * cells] += w * grad_out[c];
  }
}

}  // namespace mhr
