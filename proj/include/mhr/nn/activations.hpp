// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

namespace mhr {

template <class T>
inline T relu(T x) {
  return x > T(0) ? x : T(0);
}

// Overflow-safe logistic.
template <class T>
inline T sigmoid(T x) {
  if (x >= T(0)) {
    T e = std::exp(-x);
    return T(1) / (T(1) + e);
  }
  T e = std::exp(x);
  return e / (T(1) + e);
}

// Overflow-safe softplus; maps raw head outputs to nonnegative densities.
template <class T>
inline T softplus(T x) {
  if (x > T(30)) return x;
  if (x < T(-30)) return std::exp(x);
  return std::log1p(std::exp(x));
}

template <class T>
inline T softplus_grad(T x) {
  return sigmoid(x);
}

}  // namespace mhr
