// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

namespace mhr {

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit length
  double z_near = 0.0;
  double z_far = 0.0;

  Vec3 at(double z) const { return origin + z * direction; }
};

struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool valid() const { return (lo.array() < hi.array()).all(); }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
};

// Componentwise bounds of the vertex set, grown by `padding` on every face.
// Degenerate boxes (min not strictly below max on some axis) are rejected.
inline Aabb compute_aabb(const std::vector<Vec3>& vertices, double padding) {
  if (vertices.empty()) throw ValidationError("compute_aabb: empty vertex set");
  Aabb box{vertices[0], vertices[0]};
  for (const Vec3& v : vertices) {
    box.lo = box.lo.cwiseMin(v);
    box.hi = box.hi.cwiseMax(v);
  }
  box.lo.array() -= padding;
  box.hi.array() += padding;
  if (!box.valid()) throw ValidationError("compute_aabb: degenerate box (min < max fails)");
  return box;
}

// Slab-method ray/box intersection. Entry depth is clamped to zero so rays
// starting inside the box report (0, exit). Empty when the ray misses or the
// box is entirely behind the origin.
inline std::optional<std::pair<double, double>> ray_aabb_intersect(const Ray& ray,
                                                                   const Aabb& box) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    double o = ray.origin[a], d = ray.direction[a];
    if (d == 0.0) {
      if (o < box.lo[a] || o > box.hi[a]) return std::nullopt;
      continue;
    }
    double inv = 1.0 / d;
    double ta = (box.lo[a] - o) * inv;
    double tb = (box.hi[a] - o) * inv;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

}  // namespace mhr
