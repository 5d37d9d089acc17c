// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/nn/params.hpp>

namespace mhr {

// Fully-connected layer on row batches: y = x * W^T + b.
template <class T>
class Linear {
 public:
  Linear() = default;
  Linear(int in_features, int out_features, Rng& rng)
      : weight_(out_features, in_features),
        bias_(VecX<T>::Zero(out_features)),
        grad_weight_(MatX<T>::Zero(out_features, in_features)),
        grad_bias_(VecX<T>::Zero(out_features)) {
    he_normal_fill<T>(weight_, in_features, rng);
  }

  MatX<T> forward(const MatX<T>& x, bool cache) {
    MHR_CHECK_MSG(x.cols() == weight_.cols(), "linear: input width mismatch");
    if (cache) x_cache_ = x;
    MatX<T> y = x * weight_.transpose();
    y.rowwise() += bias_.transpose();
    return y;
  }

  // Consumes the cached input; accumulates parameter gradients.
  MatX<T> backward(const MatX<T>& dy) {
    MHR_CHECK_MSG(x_cache_.rows() == dy.rows(), "linear: no cached forward for backward");
    grad_weight_.noalias() += dy.transpose() * x_cache_;
    grad_bias_.noalias() += dy.colwise().sum().transpose();
    MatX<T> dx = dy * weight_;
    x_cache_.resize(0, 0);
    return dx;
  }

  void visit_params(const std::string& prefix, ParamList<T>& out) {
    out.push_back({prefix + ".weight", weight_.data(), grad_weight_.data(),
                   static_cast<size_t>(weight_.size())});
    out.push_back({prefix + ".bias", bias_.data(), grad_bias_.data(),
                   static_cast<size_t>(bias_.size())});
  }

  int in_features() const { return static_cast<int>(weight_.cols()); }
  int out_features() const { return static_cast<int>(weight_.rows()); }
  MatX<T>& weight() { return weight_; }
  VecX<T>& bias() { return bias_; }

 private:
  MatX<T> weight_;
  VecX<T> bias_;
  MatX<T> grad_weight_;
  VecX<T> grad_bias_;
  MatX<T> x_cache_;
};

}  // namespace mhr
