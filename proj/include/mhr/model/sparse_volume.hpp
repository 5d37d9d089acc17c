// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/geometry/aabb.hpp>

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace mhr {

// Field-of-view volume constants: 5 mm voxels, 5 cm padding around the
// template mesh bounds on every axis.
inline constexpr double kVoxelSize = 0.005;
inline constexpr double kVolumePadding = 0.05;

struct VoxelCoord {
  int x = 0, y = 0, z = 0;
};

inline std::uint64_t pack_voxel(int x, int y, int z) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 42) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(y) & 0x1FFFFF) << 21) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(z) & 0x1FFFFF));
}

// Occupied-voxel list over the padded mesh bounds in the input camera frame.
// Vertices falling into the same voxel have their features averaged.
template <class T>
struct SparseFeatureVolume {
  Vec3 origin = Vec3::Zero();  // camera-frame corner of voxel (0,0,0)
  double voxel_size = kVoxelSize;
  int nx = 0, ny = 0, nz = 0;
  std::vector<VoxelCoord> coords;
  MatX<T> features;                  // n_occupied x 65
  std::vector<int> vertex_voxel;     // vertex -> occupied-voxel row
  std::vector<int> voxel_vertex_count;

  // Continuous voxel coordinates of a camera-frame point (units of voxels).
  Vec3 to_voxel(const Vec3& x_cam) const { return (x_cam - origin) / voxel_size; }
};

template <class T>
inline SparseFeatureVolume<T> build_sparse_volume(const MatX<T>& mesh_feature,
                                                  const std::vector<Vec3>& mesh_cam) {
  MHR_CHECK(mesh_feature.rows() == static_cast<Eigen::Index>(mesh_cam.size()));
  bool any_in_front = false;
  for (const Vec3& v : mesh_cam)
    if (v.z() > 0) {
      any_in_front = true;
      break;
    }
  if (!any_in_front) throw ValidationError("build_sparse_volume: mesh entirely behind camera");

  Aabb box = compute_aabb(mesh_cam, kVolumePadding);
  SparseFeatureVolume<T> vol;
  vol.origin = box.lo;
  vol.nx = static_cast<int>(std::ceil(box.extent().x() / kVoxelSize));
  vol.ny = static_cast<int>(std::ceil(box.extent().y() / kVoxelSize));
  vol.nz = static_cast<int>(std::ceil(box.extent().z() / kVoxelSize));

  std::unordered_map<std::uint64_t, int> index;
  index.reserve(mesh_cam.size());
  vol.vertex_voxel.resize(mesh_cam.size());
  std::vector<int> counts;
  std::vector<int> rows_of_vertex;
  for (size_t i = 0; i < mesh_cam.size(); ++i) {
    Vec3 p = vol.to_voxel(mesh_cam[i]);
    int ix = static_cast<int>(std::floor(p.x()));
    int iy = static_cast<int>(std::floor(p.y()));
    int iz = static_cast<int>(std::floor(p.z()));
    MHR_CHECK(ix >= 0 && ix < vol.nx && iy >= 0 && iy < vol.ny && iz >= 0 && iz < vol.nz);
    auto [it, inserted] = index.try_emplace(pack_voxel(ix, iy, iz),
                                            static_cast<int>(vol.coords.size()));
    if (inserted) {
      vol.coords.push_back({ix, iy, iz});
      counts.push_back(0);
    }
    vol.vertex_voxel[i] = it->second;
    counts[it->second]++;
  }
  vol.voxel_vertex_count = counts;

  const int n = static_cast<int>(vol.coords.size());
  vol.features.setZero(n, mesh_feature.cols());
  for (size_t i = 0; i < mesh_cam.size(); ++i)
    vol.features.row(vol.vertex_voxel[i]) += mesh_feature.row(static_cast<Eigen::Index>(i));
  for (int r = 0; r < n; ++r) vol.features.row(r) /= T(counts[r]);
  return vol;
}

// d(loss)/d(mesh feature) given d(loss)/d(voxel features): each vertex owns
// 1/count of its voxel's gradient.
template <class T>
inline MatX<T> sparse_volume_backward(const SparseFeatureVolume<T>& vol,
                                      const MatX<T>& grad_voxel_features) {
  MatX<T> grad(vol.vertex_voxel.size(), grad_voxel_features.cols());
  for (size_t i = 0; i < vol.vertex_voxel.size(); ++i) {
    int r = vol.vertex_voxel[i];
    grad.row(static_cast<Eigen::Index>(i)) =
        grad_voxel_features.row(r) / T(vol.voxel_vertex_count[r]);
  }
  return grad;
}

}  // namespace mhr
