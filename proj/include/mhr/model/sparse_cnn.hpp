// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/geometry/grids.hpp>
#include <mhr/model/sparse_volume.hpp>
#include <mhr/nn/batchnorm.hpp>
#include <mhr/nn/params.hpp>

#include <array>
#include <unordered_map>
#include <vector>

namespace mhr {

// Active-site tensor for sparse 3D convolutions: coordinate list plus a
// row-per-site feature matrix. Inactive sites are implicit zeros.
template <class T>
struct SparseTensor {
  int nx = 0, ny = 0, nz = 0;
  std::vector<VoxelCoord> coords;
  std::unordered_map<std::uint64_t, int> index;
  MatX<T> feats;  // n_sites x channels

  void build_index() {
    index.clear();
    index.reserve(coords.size());
    for (size_t i = 0; i < coords.size(); ++i)
      index.emplace(pack_voxel(coords[i].x, coords[i].y, coords[i].z),
                    static_cast<int>(i));
  }
  int site_count() const { return static_cast<int>(coords.size()); }
};

// 3x3x3 sparse convolution. Stride 1 runs submanifold-style (the active set
// is preserved; neighbors outside it read zero). Stride 2 emits every site
// whose kernel window covers an active input, on the half-resolution lattice
// (pad 1, output dims = ceil(input/2)).
template <class T>
class SparseConv3d {
 public:
  static constexpr int kKernelVolume = 27;

  SparseConv3d() = default;
  SparseConv3d(int in_c, int out_c, int stride, int dilation, Rng& rng)
      : in_c_(in_c), out_c_(out_c), stride_(stride), dilation_(dilation),
        weight_(kKernelVolume * out_c, in_c),
        bias_(VecX<T>::Zero(out_c)),
        grad_weight_(MatX<T>::Zero(kKernelVolume * out_c, in_c)),
        grad_bias_(VecX<T>::Zero(out_c)) {
    he_normal_fill<T>(weight_, in_c * kKernelVolume, rng);
  }

  SparseTensor<T> forward(const SparseTensor<T>& in, bool cache) {
    SparseTensor<T> out;
    if (stride_ == 1) {
      out.nx = in.nx;
      out.ny = in.ny;
      out.nz = in.nz;
      out.coords = in.coords;
      out.index = in.index;
    } else {
      out.nx = (in.nx + 1) / 2;
      out.ny = (in.ny + 1) / 2;
      out.nz = (in.nz + 1) / 2;
      // Output sites: j such that some active input lies in 2j-1 .. 2j+1.
      for (const VoxelCoord& c : in.coords)
        for (int dz = -1; dz <= 1; ++dz)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              int jx = c.x + dx, jy = c.y + dy, jz = c.z + dz;
              if ((jx & 1) || (jy & 1) || (jz & 1)) continue;
              jx /= 2;
              jy /= 2;
              jz /= 2;
              if (jx < 0 || jx >= out.nx || jy < 0 || jy >= out.ny || jz < 0 ||
                  jz >= out.nz)
                continue;
              if (out.index.emplace(pack_voxel(jx, jy, jz),
                                    static_cast<int>(out.coords.size()))
                      .second)
                out.coords.push_back({jx, jy, jz});
            }
    }

    // Gather/GEMM/scatter per kernel offset.
    build_pairs(in, out);
    out.feats.setZero(out.site_count(), out_c_);
    out.feats.rowwise() += bias_.transpose();
    for (int k = 0; k < kKernelVolume; ++k) {
      const auto& pr = pairs_[k];
      if (pr.empty()) continue;
      MatX<T> xg(pr.size(), in_c_);
      for (size_t i = 0; i < pr.size(); ++i) xg.row(i) = in.feats.row(pr[i].second);
      MatX<T> yg = xg * weight_.middleRows(k * out_c_, out_c_).transpose();
      for (size_t i = 0; i < pr.size(); ++i) out.feats.row(pr[i].first) += yg.row(i);
    }
    if (cache) in_feats_ = in.feats;
    return out;
  }

  MatX<T> backward(const MatX<T>& grad_out) {
    MHR_CHECK_MSG(in_feats_.size() > 0, "sparse conv: no cached forward");
    MatX<T> grad_in = MatX<T>::Zero(in_feats_.rows(), in_c_);
    grad_bias_.noalias() += grad_out.colwise().sum().transpose();
    for (int k = 0; k < kKernelVolume; ++k) {
      const auto& pr = pairs_[k];
      if (pr.empty()) continue;
      MatX<T> dyg(pr.size(), out_c_), xg(pr.size(), in_c_);
      for (size_t i = 0; i < pr.size(); ++i) {
        dyg.row(i) = grad_out.row(pr[i].first);
        xg.row(i) = in_feats_.row(pr[i].second);
      }
      grad_weight_.middleRows(k * out_c_, out_c_).noalias() += dyg.transpose() * xg;
      MatX<T> dxg = dyg * weight_.middleRows(k * out_c_, out_c_);
      for (size_t i = 0; i < pr.size(); ++i) grad_in.row(pr[i].second) += dxg.row(i);
    }
    in_feats_.resize(0, 0);
    return grad_in;
  }

  void visit_params(const std::string& prefix, ParamList<T>& out) {
    out.push_back({prefix + ".weight", weight_.data(), grad_weight_.data(),
                   static_cast<size_t>(weight_.size())});
    out.push_back({prefix + ".bias", bias_.data(), grad_bias_.data(),
                   static_cast<size_t>(bias_.size())});
  }

  int out_channels() const { return out_c_; }
  int stride() const { return stride_; }

 private:
  void build_pairs(const SparseTensor<T>& in, const SparseTensor<T>& out) {
    for (auto& p : pairs_) p.clear();
    for (int oz = -1; oz <= 1; ++oz)
      for (int oy = -1; oy <= 1; ++oy)
        for (int ox = -1; ox <= 1; ++ox) {
          int k = (oz + 1) * 9 + (oy + 1) * 3 + (ox + 1);
          auto& pr = pairs_[k];
          for (size_t j = 0; j < out.coords.size(); ++j) {
            const VoxelCoord& oc = out.coords[j];
            int ix = oc.x * stride_ + ox * dilation_;
            int iy = oc.y * stride_ + oy * dilation_;
            int iz = oc.z * stride_ + oz * dilation_;
            if (ix < 0 || ix >= in.nx || iy < 0 || iy >= in.ny || iz < 0 || iz >= in.nz)
              continue;
            auto it = in.index.find(pack_voxel(ix, iy, iz));
            if (it == in.index.end()) continue;
            pr.emplace_back(static_cast<int>(j), it->second);
          }
        }
  }

  int in_c_ = 0, out_c_ = 0, stride_ = 1, dilation_ = 1;
  MatX<T> weight_;  // kKernelVolume*out_c x in_c, offset-major slices
  VecX<T> bias_;
  MatX<T> grad_weight_;
  VecX<T> grad_bias_;
  MatX<T> in_feats_;
  std::array<std::vector<std::pair<int, int>>, kKernelVolume> pairs_;
};

// Multi-scale outputs of the sparse CNN: tap tensors after layers 5, 9, 13
// and 17, at strides 2/4/8/16 and channels 32/32/64/64.
template <class T>
struct CnnTaps {
  std::array<SparseTensor<T>, 4> taps;
  static constexpr std::array<int, 4> kStrides{2, 4, 8, 16};
  static constexpr std::array<int, 4> kChannels{32, 32, 64, 64};
};

// 17-layer sparse 3D CNN over the mesh-feature volume; every convolution is
// followed by per-site batch normalization and relu.
template <class T>
class SparseCnn {
 public:
  SparseCnn() = default;
  explicit SparseCnn(Rng& rng) {
    // (in_c, out_c, stride, dilation) per layer.
    const int spec[17][4] = {
        {65, 32, 1, 1}, {32, 32, 1, 1}, {32, 32, 2, 1}, {32, 32, 1, 1}, {32, 32, 1, 1},
        {32, 32, 2, 1}, {32, 32, 1, 2}, {32, 32, 1, 2}, {32, 32, 1, 2},
        {32, 64, 2, 1}, {64, 64, 1, 2}, {64, 64, 1, 2}, {64, 64, 1, 2},
        {64, 64, 2, 1}, {64, 64, 1, 2}, {64, 64, 1, 2}, {64, 64, 1, 2}};
    for (int i = 0; i < 17; ++i) {
      convs_.emplace_back(spec[i][0], spec[i][1], spec[i][2], spec[i][3], rng);
      bns_.emplace_back(BatchNorm1d<T>(spec[i][1]));
    }
  }

  static constexpr std::array<int, 4> kTapLayers{4, 8, 12, 16};  // 0-based

  CnnTaps<T> forward(const SparseFeatureVolume<T>& volume, bool train) {
    MHR_CHECK_MSG(!volume.coords.empty(), "sparse cnn: empty input volume");
    SparseTensor<T> x;
    x.nx = volume.nx;
    x.ny = volume.ny;
    x.nz = volume.nz;
    x.coords = volume.coords;
    x.feats = volume.features;
    x.build_index();

    CnnTaps<T> out;
    if (train) relu_cache_.assign(17, {});
    int tap = 0;
    for (int i = 0; i < 17; ++i) {
      SparseTensor<T> y = convs_[i].forward(x, train);
      y.feats = bns_[i].forward(y.feats, train);
      y.feats = y.feats.cwiseMax(T(0));
      if (train) relu_cache_[i] = y.feats;
      if (tap < 4 && i == kTapLayers[tap]) out.taps[tap++] = y;
      x = std::move(y);
    }
    return out;
  }

  // grad_taps carries d(loss)/d(tap feats); returns d(loss)/d(input feats).
  MatX<T> backward(const std::array<MatX<T>, 4>& grad_taps) {
    MatX<T> g = grad_taps[3];
    int tap = 2;
    for (int i = 16; i >= 0; --i) {
      g = g.cwiseProduct(
          relu_cache_[i].unaryExpr([](T v) { return v > T(0) ? T(1) : T(0); }));
      g = convs_[i].backward(bns_[i].backward(g));
      if (tap >= 0 && i == kTapLayers[tap] + 1) {
        g += grad_taps[tap];
        --tap;
      }
    }
    relu_cache_.clear();
    return g;
  }

  void visit_params(const std::string& prefix, ParamList<T>& out) {
    for (int i = 0; i < 17; ++i) {
      convs_[i].visit_params(prefix + ".conv" + std::to_string(i + 1), out);
      bns_[i].visit_params(prefix + ".bn" + std::to_string(i + 1), out);
    }
  }
  void visit_buffers(const std::string& prefix,
                     std::vector<std::pair<std::string, std::pair<T*, size_t>>>& out) {
    for (int i = 0; i < 17; ++i)
      bns_[i].visit_buffers(prefix + ".bn" + std::to_string(i + 1), out);
  }

 private:
  std::vector<SparseConv3d<T>> convs_;
  std::vector<BatchNorm1d<T>> bns_;
  std::vector<MatX<T>> relu_cache_;
};

}  // namespace mhr
