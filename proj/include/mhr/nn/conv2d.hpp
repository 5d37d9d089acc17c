// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/geometry/interp.hpp>
#include <mhr/nn/params.hpp>

#include <vector>

namespace mhr {

// 2D ops on planar activations: one channel per matrix row (C x H*W).
// Batch size is one image throughout the pipeline.

namespace detail {

// col has in_c*k*k rows, oh*ow columns; row order (c, ky, kx).
template <class T>
inline void im2col(const MatX<T>& x, int h, int w, int k, int stride, int pad,
                   MatX<T>& col) {
  const int in_c = static_cast<int>(x.rows());
  const int oh = (h + 2 * pad - k) / stride + 1;
  const int ow = (w + 2 * pad - k) / stride + 1;
  col.setZero(in_c * k * k, static_cast<Eigen::Index>(oh) * ow);
  for (int c = 0; c < in_c; ++c) {
    const T* xrow = x.row(c).data();
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        T* crow = col.row((c * k + ky) * k + kx).data();
        for (int oy = 0; oy < oh; ++oy) {
          int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          for (int ox = 0; ox < ow; ++ox) {
            int ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= w) continue;
            crow[static_cast<size_t>(oy) * ow + ox] = xrow[static_cast<size_t>(iy) * w + ix];
          }
        }
      }
  }
}

template <class T>
inline void col2im(const MatX<T>& col, int h, int w, int k, int stride, int pad,
                   MatX<T>& x) {
  const int in_c = static_cast<int>(x.rows());
  const int oh = (h + 2 * pad - k) / stride + 1;
  const int ow = (w + 2 * pad - k) / stride + 1;
  x.setZero();
  for (int c = 0; c < in_c; ++c) {
    T* xrow = x.row(c).data();
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const T* crow = col.row((c * k + ky) * k + kx).data();
        for (int oy = 0; oy < oh; ++oy) {
          int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          for (int ox = 0; ox < ow; ++ox) {
            int ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= w) continue;
            xrow[static_cast<size_t>(iy) * w + ix] += crow[static_cast<size_t>(oy) * ow + ox];
          }
        }
      }
  }
}

}  // namespace detail

template <class T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_c, int out_c, int kernel, int stride, int pad, Rng& rng)
      : in_c_(in_c), out_c_(out_c), kernel_(kernel), stride_(stride), pad_(pad),
        weight_(out_c, in_c * kernel * kernel),
        bias_(VecX<T>::Zero(out_c)),
        grad_weight_(MatX<T>::Zero(out_c, in_c * kernel * kernel)),
        grad_bias_(VecX<T>::Zero(out_c)) {
    he_normal_fill<T>(weight_, in_c * kernel * kernel, rng);
  }

  MatX<T> forward(const MatX<T>& x, int h, int w, bool cache) {
    MHR_CHECK(x.rows() == in_c_ && x.cols() == static_cast<Eigen::Index>(h) * w);
    MatX<T> col;
    detail::im2col(x, h, w, kernel_, stride_, pad_, col);
    MatX<T> y = weight_ * col;
    y.colwise() += bias_;
    if (cache) {
      x_cache_ = x;
      in_h_ = h;
      in_w_ = w;
    }
    return y;
  }

  // Recomputes im2col from the cached input rather than holding the column
  // matrix across the step (memory stays flat on the 256x256 encoder).
  MatX<T> backward(const MatX<T>& dy) {
    MHR_CHECK_MSG(x_cache_.size() > 0, "conv2d: no cached forward");
    MatX<T> col;
    detail::im2col(x_cache_, in_h_, in_w_, kernel_, stride_, pad_, col);
    grad_weight_.noalias() += dy * col.transpose();
    grad_bias_.noalias() += dy.rowwise().sum();
    MatX<T> dcol = weight_.transpose() * dy;
    MatX<T> dx(in_c_, x_cache_.cols());
    detail::col2im(dcol, in_h_, in_w_, kernel_, stride_, pad_, dx);
    x_cache_.resize(0, 0);
    return dx;
  }

  int out_size(int in_size) const { return (in_size + 2 * pad_ - kernel_) / stride_ + 1; }

  void visit_params(const std::string& prefix, ParamList<T>& out) {
    out.push_back({prefix + ".weight", weight_.data(), grad_weight_.data(),
                   static_cast<size_t>(weight_.size())});
    out.push_back({prefix + ".bias", bias_.data(), grad_bias_.data(),
                   static_cast<size_t>(bias_.size())});
  }

  MatX<T>& weight() { return weight_; }
  VecX<T>& bias() { return bias_; }

 private:
  int in_c_ = 0, out_c_ = 0, kernel_ = 0, stride_ = 0, pad_ = 0;
  MatX<T> weight_;
  VecX<T> bias_;
  MatX<T> grad_weight_;
  VecX<T> grad_bias_;
  MatX<T> x_cache_;
  int in_h_ = 0, in_w_ = 0;
};

// 3x3 stride-2 max pooling with pad 1 (the encoder's only pooling op).
template <class T>
class MaxPool2d {
 public:
  MaxPool2d(int kernel, int stride, int pad) : kernel_(kernel), stride_(stride), pad_(pad) {}

  MatX<T> forward(const MatX<T>& x, int h, int w, bool cache) {
    const int c = static_cast<int>(x.rows());
    const int oh = (h + 2 * pad_ - kernel_) / stride_ + 1;
    const int ow = (w + 2 * pad_ - kernel_) / stride_ + 1;
    MatX<T> y(c, static_cast<Eigen::Index>(oh) * ow);
    if (cache) argmax_.assign(static_cast<size_t>(c) * oh * ow, -1);
    for (int ci = 0; ci < c; ++ci) {
      const T* xrow = x.row(ci).data();
      T* yrow = y.row(ci).data();
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          T best = std::numeric_limits<T>::lowest();
          long best_idx = -1;
          for (int ky = 0; ky < kernel_; ++ky) {
            int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < kernel_; ++kx) {
              int ix = ox * stride_ - pad_ + kx;
              if (ix < 0 || ix >= w) continue;
              T v = xrow[static_cast<size_t>(iy) * w + ix];
              if (v > best) {
                best = v;
                best_idx = static_cast<long>(iy) * w + ix;
              }
            }
          }
          yrow[static_cast<size_t>(oy) * ow + ox] = best;
          if (cache) argmax_[(static_cast<size_t>(ci) * oh + oy) * ow + ox] = best_idx;
        }
    }
    if (cache) {
      in_h_ = h;
      in_w_ = w;
      out_h_ = oh;
      out_w_ = ow;
    }
    return y;
  }

  MatX<T> backward(const MatX<T>& dy) {
    const int c = static_cast<int>(dy.rows());
    MatX<T> dx = MatX<T>::Zero(c, static_cast<Eigen::Index>(in_h_) * in_w_);
    for (int ci = 0; ci < c; ++ci) {
      const T* dyr = dy.row(ci).data();
      T* dxr = dx.row(ci).data();
      for (long o = 0; o < static_cast<long>(out_h_) * out_w_; ++o) {
        long idx = argmax_[static_cast<size_t>(ci) * out_h_ * out_w_ + o];
        if (idx >= 0) dxr[idx] += dyr[o];
      }
    }
    return dx;
  }

 private:
  int kernel_, stride_, pad_;
  std::vector<long> argmax_;
  int in_h_ = 0, in_w_ = 0, out_h_ = 0, out_w_ = 0;
};

// Integer-factor bilinear upsampling; output pixel centers map to input
// coordinates (o + 0.5) / s - 0.5 with edge clamp.
template <class T>
class UpsampleBilinear {
 public:
  explicit UpsampleBilinear(int scale) : scale_(scale) {}

  MatX<T> forward(const MatX<T>& x, int h, int w) const {
    const int c = static_cast<int>(x.rows());
    const int oh = h * scale_, ow = w * scale_;
    MatX<T> y(c, static_cast<Eigen::Index>(oh) * ow);
    for (int oy = 0; oy < oh; ++oy) {
      auto [y0, y1, wy] = axis_taps(oy, h);
      for (int ox = 0; ox < ow; ++ox) {
        auto [x0, x1, wx] = axis_taps(ox, w);
        const T w00 = static_cast<T>((1 - wy) * (1 - wx)), w01 = static_cast<T>((1 - wy) * wx);
        const T w10 = static_cast<T>(wy * (1 - wx)), w11 = static_cast<T>(wy * wx);
        for (int ci = 0; ci < c; ++ci) {
          const T* xr = x.row(ci).data();
          y(ci, static_cast<Eigen::Index>(oy) * ow + ox) =
              w00 * xr[static_cast<size_t>(y0) * w + x0] + w01 * xr[static_cast<size_t>(y0) * w + x1] +
              w10 * xr[static_cast<size_t>(y1) * w + x0] + w11 * xr[static_cast<size_t>(y1) * w + x1];
        }
      }
    }
    return y;
  }

  MatX<T> backward(const MatX<T>& dy, int h, int w) const {
    const int c = static_cast<int>(dy.rows());
    const int oh = h * scale_, ow = w * scale_;
    MatX<T> dx = MatX<T>::Zero(c, static_cast<Eigen::Index>(h) * w);
    for (int oy = 0; oy < oh; ++oy) {
      auto [y0, y1, wy] = axis_taps(oy, h);
      for (int ox = 0; ox < ow; ++ox) {
        auto [x0, x1, wx] = axis_taps(ox, w);
        const T w00 = static_cast<T>((1 - wy) * (1 - wx)), w01 = static_cast<T>((1 - wy) * wx);
        const T w10 = static_cast<T>(wy * (1 - wx)), w11 = static_cast<T>(wy * wx);
        for (int ci = 0; ci < c; ++ci) {
          T g = dy(ci, static_cast<Eigen::Index>(oy) * ow + ox);
          T* dxr = dx.row(ci).data();
          dxr[static_cast<size_t>(y0) * w + x0] += w00 * g;
          dxr[static_cast<size_t>(y0) * w + x1] += w01 * g;
          dxr[static_cast<size_t>(y1) * w + x0] += w10 * g;
          dxr[static_cast<size_t>(y1) * w + x1] += w11 * g;
        }
      }
    }
    return dx;
  }

 private:
  std::tuple<int, int, double> axis_taps(int o, int in_size) const {
    double pos = (o + 0.5) / scale_ - 0.5;
    double f = std::floor(pos);
    int i0 = static_cast<int>(f);
    double frac = pos - f;
    int lo = std::clamp(i0, 0, in_size - 1);
    int hi = std::clamp(i0 + 1, 0, in_size - 1);
    return {lo, hi, frac};
  }

  int scale_;
};

}  // namespace mhr
