// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/core/rng.hpp>

#include <cmath>
#include <vector>

namespace mhr {

inline constexpr int kSamplesPerRay = 64;
inline constexpr double kInpaintLossWeight = 1e-3;

// N depths in [z_near, z_far): one per equal-length bin. Training draws a
// uniform sample inside each bin; eval uses the deterministic midpoints.
inline std::vector<double> stratified_depths(double z_near, double z_far, int n,
                                             bool stratified, Rng* rng) {
  MHR_CHECK_MSG(z_near < z_far, "stratified_depths: z_near must be < z_far");
  MHR_CHECK(n >= 1);
  std::vector<double> depths(n);
  const double step = (z_far - z_near) / n;
  for (int i = 0; i < n; ++i) {
    double jitter = stratified ? rng->uniform() : 0.5;
    depths[i] = z_near + (i + jitter) * step;
  }
  return depths;
}

template <class T>
struct CompositeResult {
  Vec3T<T> color = Vec3T<T>::Zero();
  T opacity = T(0);          // 1 - T_{N+1}
  VecX<T> weights;           // per-sample w_i
};

// Transmittance compositing: C = sum_i T_i (1 - exp(-sigma_i delta_i)) c_i
// with T_1 = 1 and T_i the product of the preceding segment transmittances.
template <class T>
inline CompositeResult<T> composite(const VecX<T>& sigmas, const MatX<T>& colors,
                                    const VecX<T>& deltas) {
  const Eigen::Index n = sigmas.size();
  MHR_CHECK(colors.rows() == n && colors.cols() == 3 && deltas.size() == n);
  MHR_CHECK_MSG((sigmas.array() >= T(0)).all(), "composite: negative sigma");
  MHR_CHECK_MSG((deltas.array() >= T(0)).all(), "composite: negative delta");
  CompositeResult<T> out;
  out.weights.resize(n);
  T transmittance = T(1);
  for (Eigen::Index i = 0; i < n; ++i) {
    T seg = std::exp(-sigmas[i] * deltas[i]);
    T w = transmittance * (T(1) - seg);
    out.weights[i] = w;
    out.color += w * colors.row(i).transpose();
    transmittance *= seg;
  }
  out.opacity = T(1) - transmittance;
  return out;
}

// Analytic gradients of the composite color:
//   dC/dc_i     = w_i
//   dC/dsigma_i = delta_i (T_i e^{-sigma_i delta_i} c_i - sum_{j>i} w_j c_j)
template <class T>
inline void composite_backward(const VecX<T>& sigmas, const MatX<T>& colors,
                               const VecX<T>& deltas, const Vec3T<T>& grad_color,
                               VecX<T>& grad_sigmas, MatX<T>& grad_colors) {
  const Eigen::Index n = sigmas.size();
  grad_sigmas.resize(n);
  grad_colors.resize(n, 3);
  VecX<T> trans(n), seg(n), w(n);
  T t = T(1);
  for (Eigen::Index i = 0; i < n; ++i) {
    trans[i] = t;
    seg[i] = std::exp(-sigmas[i] * deltas[i]);
    w[i] = t * (T(1) - seg[i]);
    t *= seg[i];
  }
  // suffix[i] = sum_{j>i} w_j (c_j . g)
  T suffix = T(0);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    T cg = colors.row(i).dot(grad_color.transpose());
    grad_colors.row(i) = w[i] * grad_color.transpose();
    grad_sigmas[i] = deltas[i] * (trans[i] * seg[i] * cg - suffix);
    suffix += w[i] * cg;
  }
}

// Sum of squared color differences over the ray set.
template <class T>
inline T rendering_loss(const MatX<T>& pred, const MatX<T>& gt, MatX<T>* grad_pred) {
  MHR_CHECK_MSG(pred.rows() == gt.rows() && pred.cols() == 3 && gt.cols() == 3,
                "rendering_loss: shape mismatch");
  if (grad_pred) *grad_pred = T(2) * (pred - gt);
  return (pred - gt).squaredNorm();
}

template <class T>
inline T total_loss(T render_loss, T inpaint_loss, T lambda) {
  return render_loss + lambda * inpaint_loss;
}

}  // namespace mhr
