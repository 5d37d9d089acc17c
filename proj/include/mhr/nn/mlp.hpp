// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/nn/activations.hpp>
#include <mhr/nn/linear.hpp>

#include <vector>

namespace mhr {

enum class OutputActivation { kNone, kSigmoid, kSoftplus };

// Perceptron stack: Linear -> ReLU -> ... -> Linear -> output activation.
template <class T>
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<int>& widths, OutputActivation out_act, Rng& rng)
      : out_act_(out_act) {
    MHR_CHECK(widths.size() >= 2);
    for (size_t i = 0; i + 1 < widths.size(); ++i)
      layers_.emplace_back(widths[i], widths[i + 1], rng);
  }

  MatX<T> forward(const MatX<T>& x, bool cache) {
    if (cache) {
      hidden_cache_.assign(layers_.size() - 1, {});
      out_cache_.resize(0, 0);
    }
    MatX<T> h = x;
    for (size_t i = 0; i < layers_.size(); ++i) {
      h = layers_[i].forward(h, cache);
      if (i + 1 < layers_.size()) {
        h = h.cwiseMax(T(0));
        if (cache) hidden_cache_[i] = h;
      }
    }
    switch (out_act_) {
      case OutputActivation::kNone:
        break;
      case OutputActivation::kSigmoid:
        h = h.unaryExpr([](T v) { return sigmoid(v); });
        break;
      case OutputActivation::kSoftplus:
        if (cache) out_cache_ = h;  // pre-activation, needed for the grad
        h = h.unaryExpr([](T v) { return softplus(v); });
        break;
    }
    if (cache && out_act_ == OutputActivation::kSigmoid) out_cache_ = h;
    return h;
  }

  MatX<T> backward(const MatX<T>& dy) {
    MatX<T> g = dy;
    switch (out_act_) {
      case OutputActivation::kNone:
        break;
      case OutputActivation::kSigmoid:
        g = g.cwiseProduct(
            out_cache_.unaryExpr([](T y) { return y * (T(1) - y); }));
        break;
      case OutputActivation::kSoftplus:
        g = g.cwiseProduct(
            out_cache_.unaryExpr([](T v) { return softplus_grad(v); }));
        break;
    }
    for (size_t i = layers_.size(); i-- > 0;) {
      g = layers_[i].backward(g);
      if (i > 0) {
        // ReLU mask from the cached post-activation of the previous layer.
        g = g.cwiseProduct(hidden_cache_[i - 1].unaryExpr(
            [](T v) { return v > T(0) ? T(1) : T(0); }));
      }
    }
    return g;
  }

  void visit_params(const std::string& prefix, ParamList<T>& out) {
    for (size_t i = 0; i < layers_.size(); ++i)
      layers_[i].visit_params(prefix + ".layer" + std::to_string(i), out);
  }

  std::vector<Linear<T>>& layers() { return layers_; }

 private:
  std::vector<Linear<T>> layers_;
  OutputActivation out_act_ = OutputActivation::kNone;
  std::vector<MatX<T>> hidden_cache_;
  MatX<T> out_cache_;
};

}  // namespace mhr
