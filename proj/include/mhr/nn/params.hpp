// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/core/rng.hpp>

#include <string>
#include <vector>

namespace mhr {

// Flat view of one learnable tensor and its gradient accumulator. Parameter
// order is fixed by construction order and shared by the optimizer and the
// checkpoint codec.
template <class T>
struct ParamRef {
  std::string name;
  T* value = nullptr;
  T* grad = nullptr;
  size_t size = 0;
};

template <class T>
using ParamList = std::vector<ParamRef<T>>;

template <class T>
inline size_t param_count(const ParamList<T>& params) {
  size_t n = 0;
  for (const auto& p : params) n += p.size;
  return n;
}

template <class T>
inline void zero_grads(const ParamList<T>& params) {
  for (const auto& p : params)
    for (size_t i = 0; i < p.size; ++i) p.grad[i] = T(0);
}

// He-normal fill, std = sqrt(2 / fan_in).
template <class T, class Derived>
inline void he_normal_fill(Eigen::MatrixBase<Derived>& m, int fan_in, Rng& rng) {
  const double stddev = std::sqrt(2.0 / fan_in);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = static_cast<T>(rng.normal(0.0, stddev));
}

}  // namespace mhr
