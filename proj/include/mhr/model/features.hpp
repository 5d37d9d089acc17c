// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/geometry/camera.hpp>
#include <mhr/geometry/interp.hpp>

#include <vector>

namespace mhr {

// The 256x256 image plane maps onto the 128x128 feature map at half scale:
// image pixel (u,v) samples the map at (u/2, v/2).
inline constexpr double kFeatureMapScale = 0.5;

// Pixel features for a batch of camera-frame points, with the sampling taps
// retained so gradients can be scattered back into the feature map. Points at
// or behind the camera plane yield a zero feature and a flag instead of an
// error (rays may start marginally behind on degenerate fits).
template <class T>
struct PixelFeatureBatch {
  MatX<T> features;                 // N x C
  std::vector<BilinearTaps> taps;   // N, empty taps when behind/outside
  std::vector<std::uint8_t> behind; // N

  int count() const { return static_cast<int>(features.rows()); }
};

template <class T>
inline PixelFeatureBatch<T> compute_pixel_features(const FeatureMap<T>& fmap,
                                                   const Mat3& intrinsics,
                                                   const std::vector<Vec3>& x_cam) {
  PixelFeatureBatch<T> out;
  const int n = static_cast<int>(x_cam.size());
  out.features.setZero(n, fmap.channels);
  out.taps.resize(n);
  out.behind.assign(n, 0);
  std::vector<T> buf(fmap.channels);
  for (int i = 0; i < n; ++i) {
    if (x_cam[i].z() <= 0) {
      out.behind[i] = 1;
      continue;
    }
    Vec2 uv = project_to_image(x_cam[i], intrinsics);
    out.taps[i] = bilinear_taps(fmap.width, fmap.height, uv.x() * kFeatureMapScale,
                                uv.y() * kFeatureMapScale);
    bilinear_sample(fmap, uv.x(), uv.y(), kFeatureMapScale, buf.data());
    for (int c = 0; c < fmap.channels; ++c) out.features(i, c) = buf[c];
  }
  return out;
}

template <class T>
inline void scatter_pixel_feature_grads(const PixelFeatureBatch<T>& batch,
                                        const MatX<T>& grad_features,
                                        FeatureMap<T>& grad_map) {
  std::vector<T> row(grad_features.cols());
  for (int i = 0; i < batch.count(); ++i) {
    if (batch.behind[i]) continue;
    for (Eigen::Index c = 0; c < grad_features.cols(); ++c) row[c] = grad_features(i, c);
    bilinear_scatter(grad_map, batch.taps[i], row.data());
  }
}

// Per-vertex feature rows [64-d sampled image feature || root-relative depth].
// Occluded vertices still sample; the depth column disambiguates them.
template <class T>
struct MeshFeature {
  MatX<T> rows;                    // M x 65
  std::vector<BilinearTaps> taps;  // M
  std::vector<std::uint8_t> behind;
};

template <class T>
inline MeshFeature<T> compute_mesh_feature(const FeatureMap<T>& fmap, const Mat3& intrinsics,
                                           const std::vector<Vec3>& mesh_cam,
                                           const Vec3& root_cam) {
  MeshFeature<T> out;
  PixelFeatureBatch<T> px = compute_pixel_features(fmap, intrinsics, mesh_cam);
  const int m = px.count();
  out.rows.setZero(m, fmap.channels + 1);
  out.rows.leftCols(fmap.channels) = px.features;
  for (int i = 0; i < m; ++i)
    out.rows(i, fmap.channels) = static_cast<T>(root_relative_depth(mesh_cam[i], root_cam));
  out.taps = std::move(px.taps);
  out.behind = std::move(px.behind);
  return out;
}

template <class T>
inline void scatter_mesh_feature_grads(const MeshFeature<T>& mesh_feature,
                                       const MatX<T>& grad_rows, FeatureMap<T>& grad_map) {
  const int c = grad_map.channels;
  std::vector<T> row(c);
  for (size_t i = 0; i < mesh_feature.taps.size(); ++i) {
    if (mesh_feature.behind[i]) continue;
    for (int j = 0; j < c; ++j) row[j] = grad_rows(i, j);
    bilinear_scatter(grad_map, mesh_feature.taps[i], row.data());
    // depth column is data, not a function of the feature map
  }
}

}  // namespace mhr
