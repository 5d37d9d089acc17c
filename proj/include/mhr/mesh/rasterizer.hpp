// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/core/image.hpp>
#include <mhr/geometry/camera.hpp>
#include <mhr/mesh/trimesh.hpp>

#include <limits>
#include <vector>

namespace mhr {

// Z-buffer of camera-space depths; +inf (face -1) where nothing was drawn.
struct DepthBuffer {
  int width = 0, height = 0;
  std::vector<double> depth;
  std::vector<int> face;  // winning face per pixel
  int skipped_faces = 0;  // degenerate or behind-camera faces

  DepthBuffer(int w, int h)
      : width(w), height(h),
        depth(static_cast<size_t>(w) * h, std::numeric_limits<double>::infinity()),
        face(static_cast<size_t>(w) * h, -1) {}

  double at(int u, int v) const { return depth[static_cast<size_t>(v) * width + u]; }
  int face_at(int u, int v) const { return face[static_cast<size_t>(v) * width + u]; }
};

// Optional shading hooks for the synthetic renderer.
struct ShadingBuffers {
  Image* color = nullptr;                        // written at winning fragments
  Mask* mask = nullptr;                          // coverage
  const std::vector<Vec3>* vertex_colors = nullptr;   // albedo per vertex
  const std::vector<Vec3>* vertex_normals = nullptr;  // world-frame
  Vec3 light_dir = Vec3(0.4, 0.8, 0.55).normalized();  // toward the light
  double ambient = 0.85;
  double diffuse = 0.15;
};

// Depth-buffered rasterization of the mesh into `view`. Depth interpolation
// is perspective correct (1/z linear in screen space); faces touching the
// camera plane are skipped and counted.
inline DepthBuffer rasterize_mesh(const TriMesh& mesh_world, const CameraView& view,
                                  int width, int height, ShadingBuffers* shading = nullptr) {
  DepthBuffer buffer(width, height);
  const double eps_z = 1e-6;

  std::vector<Vec3> cam(mesh_world.vertices.size());
  std::vector<Vec2> screen(mesh_world.vertices.size());
  for (size_t i = 0; i < mesh_world.vertices.size(); ++i) {
    cam[i] = world_to_camera(mesh_world.vertices[i], view);
    if (cam[i].z() > eps_z) screen[i] = project_to_image(cam[i], view.intrinsics);
  }

  for (int tri_idx = 0; tri_idx < mesh_world.face_count(); ++tri_idx) {
    const auto& tri = mesh_world.faces[tri_idx];
    const Vec3 &c0 = cam[tri[0]], &c1 = cam[tri[1]], &c2 = cam[tri[2]];
    if (c0.z() <= eps_z || c1.z() <= eps_z || c2.z() <= eps_z) {
      ++buffer.skipped_faces;
      continue;
    }
    const Vec2 &p0 = screen[tri[0]], &p1 = screen[tri[1]], &p2 = screen[tri[2]];
    double area = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                  (p1.y() - p0.y()) * (p2.x() - p0.x());
    if (std::abs(area) < 1e-12) {
      ++buffer.skipped_faces;
      continue;
    }
    int u_min = std::max(0, static_cast<int>(std::ceil(std::min({p0.x(), p1.x(), p2.x()}))));
    int u_max = std::min(width - 1,
                         static_cast<int>(std::floor(std::max({p0.x(), p1.x(), p2.x()}))));
    int v_min = std::max(0, static_cast<int>(std::ceil(std::min({p0.y(), p1.y(), p2.y()}))));
    int v_max = std::min(height - 1,
                         static_cast<int>(std::floor(std::max({p0.y(), p1.y(), p2.y()}))));
    if (u_min > u_max || v_min > v_max) continue;

    double inv_area = 1.0 / area;
    double iz0 = 1.0 / c0.z(), iz1 = 1.0 / c1.z(), iz2 = 1.0 / c2.z();
    for (int v = v_min; v <= v_max; ++v)
      for (int u = u_min; u <= u_max; ++u) {
        double w0 = ((p1.x() - u) * (p2.y() - v) - (p1.y() - v) * (p2.x() - u)) * inv_area;
        double w1 = ((p2.x() - u) * (p0.y() - v) - (p2.y() - v) * (p0.x() - u)) * inv_area;
        double w2 = 1.0 - w0 - w1;
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;
        double inv_z = w0 * iz0 + w1 * iz1 + w2 * iz2;
        double z = 1.0 / inv_z;
        size_t idx = static_cast<size_t>(v) * width + u;
        if (z >= buffer.depth[idx]) continue;
        buffer.depth[idx] = z;
        buffer.face[idx] = tri_idx;
        if (shading && shading->color) {
          // perspective-correct attribute interpolation
          double b0 = w0 * iz0 * z, b1 = w1 * iz1 * z, b2 = w2 * iz2 * z;
          Vec3 albedo = b0 * (*shading->vertex_colors)[tri[0]] +
                        b1 * (*shading->vertex_colors)[tri[1]] +
                        b2 * (*shading->vertex_colors)[tri[2]];
          Vec3 normal = (b0 * (*shading->vertex_normals)[tri[0]] +
                         b1 * (*shading->vertex_normals)[tri[1]] +
                         b2 * (*shading->vertex_normals)[tri[2]])
                            .normalized();
          double lambert = std::max(0.0, normal.dot(shading->light_dir));
          Vec3 rgb = albedo * (shading->ambient + shading->diffuse * lambert);
          float* px = shading->color->pixel(u, v);
          for (int c = 0; c < 3; ++c)
            px[c] = static_cast<float>(std::clamp(rgb[c], 0.0, 1.0));
          if (shading->mask) shading->mask->at(u, v) = 1;
        }
      }
  }
  return buffer;
}

}  // namespace mhr
