// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mhr {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Row-major dynamic matrices; mhr keeps point batches as rows so that
// layer forwards are plain X * W^T GEMMs.
template <class T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using Vec3T = Eigen::Matrix<T, 3, 1>;

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
inline void check_fail(const char* expr, const char* file, int line, const std::string& msg) {
  std::ostringstream os;
  os << "check failed: " << expr << " at " << file << ":" << line;
  if (!msg.empty()) os << " (" << msg << ")";
  throw std::runtime_error(os.str());
}
}  // namespace detail

#define MHR_CHECK(expr)                                                 \
  do {                                                                  \
    if (!(expr)) ::mhr::detail::check_fail(#expr, __FILE__, __LINE__, {}); \
  } while (0)

#define MHR_CHECK_MSG(expr, msg)                                        \
  do {                                                                  \
    if (!(expr)) {                                                      \
      std::ostringstream os_;                                           \
      os_ << msg;                                                       \
      ::mhr::detail::check_fail(#expr, __FILE__, __LINE__, os_.str());  \
    }                                                                   \
  } while (0)

}  // namespace mhr
