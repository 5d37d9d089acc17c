// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/geometry/camera.hpp>
#include <mhr/mesh/trimesh.hpp>

#include <optional>

namespace mhr::test {

// Moller-Trumbore ray/triangle intersection; returns ray parameter t.
inline std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir,
                                          const Vec3& a, const Vec3& b, const Vec3& c) {
  const double eps = 1e-12;
  Vec3 e1 = b - a, e2 = c - a;
  Vec3 p = dir.cross(e2);
  double det = e1.dot(p);
  if (std::abs(det) < eps) return std::nullopt;
  double inv = 1.0 / det;
  Vec3 s = origin - a;
  double u = s.dot(p) * inv;
  if (u < 0 || u > 1) return std::nullopt;
  Vec3 q = s.cross(e1);
  double v = dir.dot(q) * inv;
  if (v < 0 || u + v > 1) return std::nullopt;
  double t = e2.dot(q) * inv;
  if (t <= eps) return std::nullopt;
  return t;
}

// Occlusion-based visibility oracle: a vertex is visible from the camera iff
// no triangle (other than ones sharing the vertex) blocks the segment from
// the camera center, up to a metric slack.
inline bool vertex_visible_bruteforce(const TriMesh& mesh, int vertex,
                                      const CameraView& view, double slack = 1e-4) {
  Vec3 cam_center = view.center();
  Vec3 target = mesh.vertices[vertex];
  Vec3 cam = world_to_camera(target, view);
  if (cam.z() <= 1e-6) return false;
  Vec2 uv = project_to_image(cam, view.intrinsics);
  if (uv.x() < 0 || uv.x() > view.image.width - 1 || uv.y() < 0 ||
      uv.y() > view.image.height - 1)
    return false;
  Vec3 dir = target - cam_center;
  double dist = dir.norm();
  dir /= dist;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& tri = mesh.faces[f];
    if (tri[0] == vertex || tri[1] == vertex || tri[2] == vertex) continue;
    auto t = ray_triangle(cam_center, dir, mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                          mesh.vertices[tri[2]]);
    if (t && *t < dist - slack) return false;
  }
  return true;
}

}  // namespace mhr::test
