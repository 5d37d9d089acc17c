// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/core/image.hpp>

#include <cmath>
#include <optional>
#include <string>

namespace mhr {

// Network input resolution. Dataset views are stored at this size.
inline constexpr int kInputImageSize = 256;

// One calibrated viewpoint: pinhole intrinsics, world-to-camera pose, the
// RGB image and its foreground mask. Camera frame: +x right, +y down,
// +z forward; x_cam = R * x_world + t.
struct CameraView {
  Mat3 intrinsics = Mat3::Identity();
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  Image image;
  Mask mask;
  int view_id = -1;

  Vec3 center() const { return -rotation.transpose() * translation; }
};

inline void validate_camera(const CameraView& view, const std::string& where) {
  const Mat3& K = view.intrinsics;
  if (!(K(0, 0) > 0 && K(1, 1) > 0) || K(1, 0) != 0 || K(2, 0) != 0 || K(2, 1) != 0 ||
      std::abs(K(2, 2) - 1.0) > 1e-9)
    throw ValidationError(where + ": intrinsics not upper-triangular with positive focals");
  Mat3 rtr = view.rotation.transpose() * view.rotation;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6)
    throw ValidationError(where + ": rotation not orthonormal");
  if (view.rotation.determinant() < 0)
    throw ValidationError(where + ": rotation determinant is negative");
}

inline Vec3 world_to_camera(const Vec3& x_world, const CameraView& view) {
  return view.rotation * x_world + view.translation;
}

inline Vec3 camera_to_world(const Vec3& x_cam, const CameraView& view) {
  return view.rotation.transpose() * (x_cam - view.translation);
}

// Pinhole projection, integer coordinates sit at pixel centers.
inline Vec2 project_to_image(const Vec3& x_cam, const Mat3& K) {
  MHR_CHECK_MSG(x_cam.z() > 0, "behind camera");
  double inv_z = 1.0 / x_cam.z();
  return {K(0, 0) * x_cam.x() * inv_z + K(0, 2), K(1, 1) * x_cam.y() * inv_z + K(1, 2)};
}

// Inverse of project_to_image at a known depth.
inline Vec3 unproject_pixel(const Vec2& uv, double z, const Mat3& K) {
  return {(uv.x() - K(0, 2)) / K(0, 0) * z, (uv.y() - K(1, 2)) / K(1, 1) * z, z};
}

inline double root_relative_depth(const Vec3& x_cam, const Vec3& root_cam) {
  return x_cam.z() - root_cam.z();
}

// World-to-camera rotation for a camera at `eye` looking at `target`.
// Camera +y is world `up` projected and negated, so subjects render upright.
inline Mat3 look_at_rotation(const Vec3& eye, const Vec3& target, const Vec3& up) {
  Vec3 forward = (target - eye).normalized();
  Vec3 down = forward * up.dot(forward) - up;
  MHR_CHECK_MSG(down.norm() > 1e-9, "look_at: view direction parallel to up");
  down.normalize();
  Vec3 right = down.cross(forward);  // rows of SO(3) satisfy r0 = r1 x r2
  Mat3 R;
  R.row(0) = right.transpose();
  R.row(1) = down.transpose();
  R.row(2) = forward.transpose();
  return R;
}

inline CameraView make_look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up,
                                      double focal, int image_size) {
  CameraView view;
  view.rotation = look_at_rotation(eye, target, up);
  view.translation = -view.rotation * eye;
  view.intrinsics << focal, 0, image_size / 2.0, 0, focal, image_size / 2.0, 0, 0, 1;
  return view;
}

}  // namespace mhr
