// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/core/rng.hpp>

#include <cmath>
#include <functional>

namespace mhr::test {

inline Mat3 random_rotation(Rng& rng) {
  // Random axis-angle.
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  double angle = rng.uniform(0, 2 * M_PI);
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

inline double rel_error(double analytic, double numeric) {
  double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

// Central-difference derivative of a scalar function at x.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

}  // namespace mhr::test
