// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/nn/params.hpp>

namespace mhr {

// Channel normalization. Training uses batch statistics and keeps exponential
// running estimates (unbiased variance, momentum 0.1); eval uses the running
// statistics. Two layout variants share the math:
//   BatchNorm2d: planar activations, one channel per row (C x HW)
//   BatchNorm1d: row batches, one channel per column (N x C)

template <class T>
class BatchNorm2d {
 public:
  static constexpr double kMomentum = 0.1;
  static constexpr double kEps = 1e-5;

  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels)
      : gamma_(VecX<T>::Ones(channels)),
        beta_(VecX<T>::Zero(channels)),
        grad_gamma_(VecX<T>::Zero(channels)),
        grad_beta_(VecX<T>::Zero(channels)),
        running_mean_(VecX<T>::Zero(channels)),
        running_var_(VecX<T>::Ones(channels)) {}

  MatX<T> forward(const MatX<T>& x, bool train) {
    const Eigen::Index c = x.rows(), n = x.cols();
    MatX<T> y(c, n);
    if (train) {
      mean_ = x.rowwise().mean();
      VecX<T> var(c);
      for (Eigen::Index i = 0; i < c; ++i)
        var[i] = (x.row(i).array() - mean_[i]).square().sum() / T(n);
      inv_std_ = (var.array() + T(kEps)).rsqrt();
      xhat_.resize(c, n);
      for (Eigen::Index i = 0; i < c; ++i)
        xhat_.row(i) = (x.row(i).array() - mean_[i]) * inv_std_[i];
      for (Eigen::Index i = 0; i < c; ++i)
        y.row(i) = xhat_.row(i).array() * gamma_[i] + beta_[i];
      T unbias = n > 1 ? T(n) / T(n - 1) : T(1);
      running_mean_ = (T(1) - T(kMomentum)) * running_mean_ + T(kMomentum) * mean_;
      running_var_ =
          (T(1) - T(kMomentum)) * running_var_ + T(kMomentum) * (var * unbias);
    } else {
      for (Eigen::Index i = 0; i < c; ++i) {
        T inv = T(1) / std::sqrt(running_var_[i] + T(kEps));
        y.row(i) = ((x.row(i).array() - running_mean_[i]) * inv) * gamma_[i] + beta_[i];
      }
    }
    return y;
  }

  // Training-mode backward through the batch statistics.
  MatX<T> backward(const MatX<T>& dy) {
    const Eigen::Index c = dy.rows(), n = dy.cols();
    MHR_CHECK_MSG(xhat_.rows() == c && xhat_.cols() == n, "batchnorm: no cached forward");
    MatX<T> dx(c, n);
    for (Eigen::Index i = 0; i < c; ++i) {
      auto dyr = dy.row(i).array();
      auto xh = xhat_.row(i).array();
      T sum_dy = dyr.sum();
      T sum_dy_xhat = (dyr * xh).sum();
      grad_gamma_[i] += sum_dy_xhat;
      grad_beta_[i] += sum_dy;
      dx.row(i) = (gamma_[i] * inv_std_[i] / T(n)) *
                  (T(n) * dyr - sum_dy - xh * sum_dy_xhat);
    }
    xhat_.resize(0, 0);
    return dx;
  }

  void visit_params(const std::string& prefix, ParamList<T>& out) {
    out.push_back({prefix + ".gamma", gamma_.data(), grad_gamma_.data(),
                   static_cast<size_t>(gamma_.size())});
    out.push_back({prefix + ".beta", beta_.data(), grad_beta_.data(),
                   static_cast<size_t>(beta_.size())});
  }

  // Running statistics live in the checkpoint but are not optimized.
  void visit_buffers(const std::string& prefix,
                     std::vector<std::pair<std::string, std::pair<T*, size_t>>>& out) {
    out.push_back({prefix + ".running_mean",
                   {running_mean_.data(), static_cast<size_t>(running_mean_.size())}});
    out.push_back({prefix + ".running_var",
                   {running_var_.data(), static_cast<size_t>(running_var_.size())}});
  }

 private:
  VecX<T> gamma_, beta_, grad_gamma_, grad_beta_;
  VecX<T> running_mean_, running_var_;
  VecX<T> mean_, inv_std_;
  MatX<T> xhat_;
};

template <class T>
class BatchNorm1d {
 public:
  BatchNorm1d() = default;
  explicit BatchNorm1d(int channels) : planar_(channels) {}

  MatX<T> forward(const MatX<T>& x, bool train) {
    return planar_.forward(x.transpose(), train).transpose();
  }
  MatX<T> backward(const MatX<T>& dy) { return planar_.backward(dy.transpose()).transpose(); }

  void visit_params(const std::string& prefix, ParamList<T>& out) {
    planar_.visit_params(prefix, out);
  }
  void visit_buffers(const std::string& prefix,
                     std::vector<std::pair<std::string, std::pair<T*, size_t>>>& out) {
    planar_.visit_buffers(prefix, out);
  }

 private:
  BatchNorm2d<T> planar_;
};

}  // namespace mhr
