// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/nn/mlp.hpp>

#include <vector>

namespace mhr {

// Ground-truth vertex colors with a per-vertex validity flag (visible in at
// least one view). Invalid rows are excluded from the loss.
struct VertexColors {
  MatX<double> rgb;                 // M x 3, values in [0,1]
  std::vector<std::uint8_t> valid;  // M
};

// Two-layer perceptron regressing vertex colors from mesh features,
// 65 -> 32 -> 3 with a logistic squash keeping outputs in [0,1].
// Training-only head; render paths never consult it.
template <class T>
class MeshInpainter {
 public:
  MeshInpainter() = default;
  explicit MeshInpainter(Rng& rng)
      : mlp_({65, 32, 3}, OutputActivation::kSigmoid, rng) {}

  MatX<T> forward(const MatX<T>& mesh_feature, bool cache) {
    MHR_CHECK_MSG(mesh_feature.cols() == 65, "inpainter: mesh feature must be Mx65");
    return mlp_.forward(mesh_feature, cache);
  }
  MatX<T> backward(const MatX<T>& grad_pred) { return mlp_.backward(grad_pred); }

  void visit_params(const std::string& prefix, ParamList<T>& out) {
    mlp_.visit_params(prefix, out);
  }
  Mlp<T>& mlp() { return mlp_; }

 private:
  Mlp<T> mlp_;
};

// Sum of squared differences over valid vertices. Also emits d(loss)/d(pred)
// so the trainer can chain straight into the inpainter backward.
template <class T>
inline T inpainting_loss(const MatX<T>& pred, const VertexColors& gt, MatX<T>* grad_pred) {
  MHR_CHECK_MSG(pred.rows() == gt.rgb.rows() && pred.cols() == 3,
                "inpainting_loss: shape mismatch");
  if (grad_pred) grad_pred->setZero(pred.rows(), 3);
  T loss = T(0);
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    if (!gt.valid[i]) continue;
    for (int c = 0; c < 3; ++c) {
      T d = pred(i, c) - static_cast<T>(gt.rgb(i, c));
      loss += d * d;
      if (grad_pred) (*grad_pred)(i, c) = T(2) * d;
    }
  }
  return loss;
}

}  // namespace mhr
