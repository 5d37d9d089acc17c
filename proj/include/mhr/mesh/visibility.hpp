// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/geometry/interp.hpp>
#include <mhr/mesh/rasterizer.hpp>
#include <mhr/model/inpainter.hpp>

#include <vector>

namespace mhr {

// Depth-buffer visibility tolerance; matches the feature-volume voxel size.
inline constexpr double kVisibilityDepthEps = 0.005;

// Supersampling factor for the visibility depth buffer. Vertices sit exactly
// on the surface, so the comparison is knife-edged near silhouettes; the
// finer buffer plus the incident-face rule below keeps the rasterized answer
// aligned with exact ray-occlusion up to a thin tangency band.
inline constexpr int kVisibilitySupersample = 8;

// M x V table: vertex visible in a view iff it projects inside the image and
// is not occluded in the supersampled depth buffer.
struct VisibilityTable {
  int vertex_count = 0;
  int view_count = 0;
  std::vector<std::uint8_t> visible;  // vertex-major

  std::uint8_t at(int vertex, int view) const {
    return visible[static_cast<size_t>(vertex) * view_count + view];
  }
};

inline CameraView supersampled_camera(const CameraView& view, int factor) {
  CameraView hi = view;
  hi.intrinsics(0, 0) *= factor;
  hi.intrinsics(1, 1) *= factor;
  // pixel-center aligned rescale: u_hi = u*f + (f-1)/2
  hi.intrinsics(0, 2) = hi.intrinsics(0, 2) * factor + 0.5 * (factor - 1);
  hi.intrinsics(1, 2) = hi.intrinsics(1, 2) * factor + 0.5 * (factor - 1);
  return hi;
}

inline VisibilityTable compute_vertex_visibility(const TriMesh& mesh_world,
                                                 const std::vector<CameraView>& views,
                                                 double eps_depth = kVisibilityDepthEps) {
  VisibilityTable table;
  table.vertex_count = mesh_world.vertex_count();
  table.view_count = static_cast<int>(views.size());
  table.visible.assign(static_cast<size_t>(table.vertex_count) * table.view_count, 0);

  // A vertex cannot be occluded by its own incident faces (they meet it at
  // zero depth offset); the exact-ray definition excludes them as well.
  std::vector<std::vector<int>> incident(mesh_world.vertex_count());
  for (int f = 0; f < mesh_world.face_count(); ++f)
    for (int k = 0; k < 3; ++k) incident[mesh_world.faces[f][k]].push_back(f);

  const int ss = kVisibilitySupersample;
  for (int j = 0; j < table.view_count; ++j) {
    const CameraView& view = views[j];
    const int w = view.image.width, h = view.image.height;
    CameraView hi = supersampled_camera(view, ss);
    const int hw = w * ss, hh = h * ss;
    DepthBuffer depth = rasterize_mesh(mesh_world, hi, hw, hh);

    for (int i = 0; i < table.vertex_count; ++i) {
      Vec3 cam = world_to_camera(mesh_world.vertices[i], view);
      if (cam.z() <= 1e-6) continue;
      Vec2 uv = project_to_image(cam, view.intrinsics);
      if (uv.x() < 0 || uv.x() > w - 1 || uv.y() < 0 || uv.y() > h - 1) continue;
      Vec2 uv_hi = project_to_image(cam, hi.intrinsics);
      int u = std::clamp(static_cast<int>(std::lround(uv_hi.x())), 0, hw - 1);
      int v = std::clamp(static_cast<int>(std::lround(uv_hi.y())), 0, hh - 1);

      bool visible;
      int winner = depth.face_at(u, v);
      if (winner < 0) {
        visible = true;  // nothing drawn over this pixel, so nothing occludes
      } else if (std::find(incident[i].begin(), incident[i].end(), winner) !=
                 incident[i].end()) {
        visible = true;  // own surface patch
      } else {
        visible = cam.z() <= depth.at(u, v) + eps_depth;
      }
      if (visible)
        table.visible[static_cast<size_t>(i) * table.view_count + j] = 1;
    }
  }
  return table;
}

// Mask-weighted bilinear color sample: background taps carry zero weight so
// silhouette vertices read only subject pixels. Returns false when no tap
// lands on the subject.
inline bool sample_masked_color(const Image& image, const Mask& mask, const Vec2& uv,
                                Eigen::Vector3d& out) {
  BilinearTaps taps = bilinear_taps(image.width, image.height, uv.x(), uv.y());
  double weight_sum = 0;
  out.setZero();
  for (int k = 0; k < 4; ++k) {
    if (taps.index[k] < 0) continue;
    long idx = taps.index[k];
    if (!mask.on[idx]) continue;
    const float* p = &image.rgb[static_cast<size_t>(idx) * 3];
    out += taps.weight[k] * Eigen::Vector3d(p[0], p[1], p[2]);
    weight_sum += taps.weight[k];
  }
  if (weight_sum <= 0) return false;
  out /= weight_sum;
  return true;
}

// Per-vertex ground-truth colors: sampled from every view where the vertex
// is visible, averaged. Vertices visible nowhere (or whose samples never
// touch the subject) carry valid = false and drop out of the loss.
inline VertexColors compute_gt_vertex_colors(const TriMesh& mesh_world,
                                             const std::vector<CameraView>& views,
                                             const VisibilityTable& visibility) {
  MHR_CHECK(visibility.vertex_count == mesh_world.vertex_count());
  MHR_CHECK(visibility.view_count == static_cast<int>(views.size()));
  VertexColors out;
  out.rgb.setZero(mesh_world.vertex_count(), 3);
  out.valid.assign(mesh_world.vertex_count(), 0);

  for (int i = 0; i < mesh_world.vertex_count(); ++i) {
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    int seen = 0;
    for (int j = 0; j < visibility.view_count; ++j) {
      if (!visibility.at(i, j)) continue;
      Vec3 cam = world_to_camera(mesh_world.vertices[i], views[j]);
      Vec2 uv = project_to_image(cam, views[j].intrinsics);
      Eigen::Vector3d rgb;
      if (!sample_masked_color(views[j].image, views[j].mask, uv, rgb)) continue;
      acc += rgb;
      ++seen;
    }
    if (seen > 0) {
      out.rgb.row(i) = (acc / seen).transpose();
      out.valid[i] = 1;
    }
  }
  return out;
}

}  // namespace mhr
