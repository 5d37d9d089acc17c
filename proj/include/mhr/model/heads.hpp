// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/geometry/camera.hpp>
#include <mhr/geometry/interp.hpp>
#include <mhr/model/sparse_cnn.hpp>
#include <mhr/nn/mlp.hpp>

#include <array>
#include <vector>

namespace mhr {

inline constexpr int kPixelFeatureDim = 64;
inline constexpr int kVoxelFeatureDim = 192;  // 32+32+64+64
inline constexpr int kHeadHiddenDim = 256;

// Dense multi-scale grids sampled by the geometry branch. Densified from the
// sparse taps; inactive cells are zero, matching implicit sparse semantics.
template <class T>
struct MeshVolumes {
  std::array<VoxelGrid<T>, 4> grids;

  static MeshVolumes densify(const CnnTaps<T>& taps) {
    MeshVolumes v;
    for (int l = 0; l < 4; ++l) {
      const SparseTensor<T>& t = taps.taps[l];
      const int c = CnnTaps<T>::kChannels[l];
      v.grids[l] = VoxelGrid<T>(c, t.nz, t.ny, t.nx);
      const size_t cells = v.grids[l].cells();
      for (int i = 0; i < t.site_count(); ++i) {
        const VoxelCoord& vc = t.coords[i];
        size_t base = (static_cast<size_t>(vc.z) * t.ny + vc.y) * t.nx + vc.x;
        for (int ch = 0; ch < c; ++ch)
          v.grids[l].data[ch * cells + base] = t.feats(i, ch);
      }
    }
    return v;
  }

  // Reads the dense gradient back onto the active sites (inactive cells are
  // structurally zero; their gradient does not propagate).
  static std::array<MatX<T>, 4> gather_tap_grads(const CnnTaps<T>& taps,
                                                 const MeshVolumes<T>& grad_grids) {
    std::array<MatX<T>, 4> out;
    for (int l = 0; l < 4; ++l) {
      const SparseTensor<T>& t = taps.taps[l];
      const int c = CnnTaps<T>::kChannels[l];
      out[l].setZero(t.site_count(), c);
      const size_t cells = grad_grids.grids[l].cells();
      for (int i = 0; i < t.site_count(); ++i) {
        const VoxelCoord& vc = t.coords[i];
        size_t base = (static_cast<size_t>(vc.z) * t.ny + vc.y) * t.nx + vc.x;
        for (int ch = 0; ch < c; ++ch)
          out[l](i, ch) = grad_grids.grids[l].data[ch * cells + base];
      }
    }
    return out;
  }
};

// Taps kept per query for the gradient scatter.
struct VoxelSampleTaps {
  std::array<TrilinearTaps, 4> level;
};

// 192-d geometry feature: trilinear samples of the four tap grids at the
// query position, concatenated (32|32|64|64). Tap grid cell j of a
// stride-t level is centered on fine voxel t*j, so the sampling coordinate
// is (p - 0.5) / t for fine-voxel coordinate p.
template <class T>
inline void sample_voxel_feature(const MeshVolumes<T>& volumes, const Vec3& voxel_coord,
                                 T* out, VoxelSampleTaps* taps_out) {
  int offset = 0;
  for (int l = 0; l < 4; ++l) {
    const VoxelGrid<T>& g = volumes.grids[l];
    const double t = CnnTaps<T>::kStrides[l];
    const double gx = (voxel_coord.x() - 0.5) / t;
    const double gy = (voxel_coord.y() - 0.5) / t;
    const double gz = (voxel_coord.z() - 0.5) / t;
    TrilinearTaps taps = trilinear_taps(g.nx, g.ny, g.nz, gx, gy, gz);
    const size_t cells = g.cells();
    for (int c = 0; c < g.channels; ++c) out[offset + c] = T(0);
    for (int k = 0; k < 8; ++k) {
      if (taps.index[k] < 0) continue;
      const T w = static_cast<T>(taps.weight[k]);
      const T* src = g.data.data() + taps.index[k];
      for (int c = 0; c < g.channels; ++c) out[offset + c] += w * src[c * cells];
    }
    if (taps_out) taps_out->level[l] = taps;
    offset += g.channels;
  }
}

template <class T>
inline void scatter_voxel_feature_grads(MeshVolumes<T>& grad_grids,
                                        const VoxelSampleTaps& taps, const T* grad_out) {
  int offset = 0;
  for (int l = 0; l < 4; ++l) {
    VoxelGrid<T>& g = grad_grids.grids[l];
    trilinear_scatter(g, taps.level[l], grad_out + offset);
    offset += g.channels;
  }
}

// Four-layer perceptron regressing density from (voxel feature, pixel
// feature, root-relative depth); softplus keeps sigma nonnegative.
template <class T>
class DensityHead {
 public:
  static constexpr int kInputDim = kVoxelFeatureDim + kPixelFeatureDim + 1;  // 257

  DensityHead() = default;
  explicit DensityHead(Rng& rng)
      : mlp_({kInputDim, kHeadHiddenDim, kHeadHiddenDim, kHeadHiddenDim, 1},
             OutputActivation::kSoftplus, rng) {}

  MatX<T> forward(const MatX<T>& x, bool cache) { return mlp_.forward(x, cache); }
  MatX<T> backward(const MatX<T>& dy) { return mlp_.backward(dy); }
  void visit_params(const std::string& prefix, ParamList<T>& out) {
    mlp_.visit_params(prefix, out);
  }
  Mlp<T>& mlp() { return mlp_; }

 private:
  Mlp<T> mlp_;
};

// Five-layer perceptron regressing RGB from (pixel feature, root-relative
// depth, view direction in the input camera frame, predicted density).
// Density enters as a live input: gradients flow back into the geometry
// branch through it. The voxel feature itself is never visible here.
template <class T>
class TextureHead {
 public:
  static constexpr int kInputDim = kPixelFeatureDim + 1 + 3 + 1;  // 69
  static constexpr int kSigmaColumn = kInputDim - 1;

  TextureHead() = default;
  explicit TextureHead(Rng& rng)
      : mlp_({kInputDim, kHeadHiddenDim, kHeadHiddenDim, kHeadHiddenDim, kHeadHiddenDim, 3},
             OutputActivation::kSigmoid, rng) {}

  MatX<T> forward(const MatX<T>& x, bool cache) { return mlp_.forward(x, cache); }
  MatX<T> backward(const MatX<T>& dy) { return mlp_.backward(dy); }
  void visit_params(const std::string& prefix, ParamList<T>& out) {
    mlp_.visit_params(prefix, out);
  }
  Mlp<T>& mlp() { return mlp_; }

 private:
  Mlp<T> mlp_;
};

// Target-view ray direction expressed in the input camera frame.
inline Vec3 rotate_view_dir(const Vec3& d_world, const CameraView& input_view) {
  return input_view.rotation * d_world;
}

}  // namespace mhr
