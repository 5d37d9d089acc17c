// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#include <mhr/geometry/aabb.hpp>
#include <mhr/geometry/camera.hpp>
#include <mhr/geometry/grids.hpp>
#include <mhr/geometry/interp.hpp>

#include <gtest/gtest.h>

#include "support/test_utils.hpp"

using namespace mhr;

namespace {

CameraView random_pose(Rng& rng) {
  CameraView view;
  view.rotation = test::random_rotation(rng);
  view.translation = Vec3(rng.normal(), rng.normal(), rng.normal());
  view.intrinsics << 100, 0, 128, 0, 100, 128, 0, 0, 1;
  return view;
}

TEST(WorldToCamera, IdentityPose) {
  CameraView view;
  EXPECT_EQ(world_to_camera({1, 2, 3}, view), Vec3(1, 2, 3));
}

TEST(WorldToCamera, TranslationOnly) {
  CameraView view;
  view.translation = Vec3(0, 0, -1);
  EXPECT_EQ(world_to_camera({0, 0, 1}, view), Vec3(0, 0, 0));
}

TEST(WorldToCamera, RoundTripOracle) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    CameraView view = random_pose(rng);
    Vec3 x(rng.normal(), rng.normal(), rng.normal());
    Vec3 back = camera_to_world(world_to_camera(x, view), view);
    EXPECT_LT((back - x).norm(), 1e-9);
  }
}

TEST(ProjectToImage, OpticalAxis) {
  Mat3 K;
  K << 100, 0, 128, 0, 100, 128, 0, 0, 1;
  Vec2 uv = project_to_image({0, 0, 2}, K);
  EXPECT_DOUBLE_EQ(uv.x(), 128);
  EXPECT_DOUBLE_EQ(uv.y(), 128);
}

TEST(ProjectToImage, HandArithmetic) {
  Mat3 K;
  K << 100, 0, 128, 0, 100, 128, 0, 0, 1;
  Vec2 uv = project_to_image({1, 0, 2}, K);
  EXPECT_DOUBLE_EQ(uv.x(), 178);
  EXPECT_DOUBLE_EQ(uv.y(), 128);
}

TEST(ProjectToImage, BehindCameraThrows) {
  Mat3 K = Mat3::Identity();
  EXPECT_THROW(project_to_image({0, 0, -1}, K), std::runtime_error);
  EXPECT_THROW(project_to_image({0, 0, 0}, K), std::runtime_error);
}

TEST(ProjectToImage, UnprojectOracle) {
  Rng rng(11);
  Mat3 K;
  K << 240, 0, 127.5, 0, 260, 130.5, 0, 0, 1;
  for (int i = 0; i < 100; ++i) {
    Vec3 x(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 5.0));
    Vec2 uv = project_to_image(x, K);
    Vec3 back = unproject_pixel(uv, x.z(), K);
    EXPECT_LT((back - x).norm(), 1e-6);
  }
}

TEST(RootRelativeDepth, Examples) {
  EXPECT_DOUBLE_EQ(root_relative_depth({0.3, -0.2, 2.0}, {0.3, -0.2, 2.0}), 0.0);
  EXPECT_DOUBLE_EQ(root_relative_depth({0, 0, 2.4}, {1, 1, 2.0}), 0.4);
  // Shared depth offsets cancel exactly.
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    Vec3 x(rng.normal(), rng.normal(), rng.normal());
    Vec3 root(rng.normal(), rng.normal(), rng.normal());
    double tau = rng.normal();
    Vec3 off(0, 0, tau);
    EXPECT_NEAR(root_relative_depth(x + off, root + off), root_relative_depth(x, root),
                1e-12);
  }
}

TEST(BilinearSample, LatticePoint) {
  FeatureMap<double> map(2, 4, 4);
  Rng rng(5);
  for (auto& v : map.data) v = rng.uniform();
  std::vector<double> out(2);
  bilinear_sample(map, 2.0, 3.0, 1.0, out.data());
  EXPECT_DOUBLE_EQ(out[0], map.at(0, 3, 2));
  EXPECT_DOUBLE_EQ(out[1], map.at(1, 3, 2));
}

TEST(BilinearSample, MidpointSymmetry) {
  FeatureMap<double> map(1, 2, 2);
  map.at(0, 0, 0) = 0;
  map.at(0, 0, 1) = 0;
  map.at(0, 1, 0) = 1;
  map.at(0, 1, 1) = 1;
  double out;
  bilinear_sample(map, 0.5, 0.5, 1.0, &out);
  EXPECT_DOUBLE_EQ(out, 0.5);
}

TEST(BilinearSample, BruteForceOracle) {
  Rng rng(17);
  FeatureMap<double> map(3, 8, 10);
  for (auto& v : map.data) v = rng.normal();
  for (int trial = 0; trial < 500; ++trial) {
    double x = rng.uniform(-2, 12);
    double y = rng.uniform(-2, 10);
    std::vector<double> got(3);
    bilinear_sample(map, x, y, 1.0, got.data());
    // direct 4-neighbor weighted sum, zero outside
    int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    double ax = x - x0, ay = y - y0;
    for (int c = 0; c < 3; ++c) {
      auto value = [&](int xi, int yi) {
        if (xi < 0 || xi >= map.width || yi < 0 || yi >= map.height) return 0.0;
        return map.at(c, yi, xi);
      };
      double want = (1 - ax) * (1 - ay) * value(x0, y0) + ax * (1 - ay) * value(x0 + 1, y0) +
                    (1 - ax) * ay * value(x0, y0 + 1) + ax * ay * value(x0 + 1, y0 + 1);
      EXPECT_NEAR(got[c], want, 1e-7);
    }
  }
}

TEST(BilinearSample, OutOfBoundsReadsZero) {
  FeatureMap<double> map(1, 4, 4);
  for (auto& v : map.data) v = 1.0;
  double out;
  bilinear_sample(map, -5.0, 2.0, 1.0, &out);
  EXPECT_DOUBLE_EQ(out, 0.0);
  // half-in border pixel blends with zero, not with a clamped edge value
  bilinear_sample(map, -0.5, 1.0, 1.0, &out);
  EXPECT_DOUBLE_EQ(out, 0.5);
}

TEST(BilinearSample, ConvexCombinationProperty) {
  Rng rng(23);
  FeatureMap<double> map(1, 6, 6);
  for (auto& v : map.data) v = rng.uniform(-3, 3);
  double lo = *std::min_element(map.data.begin(), map.data.end());
  double hi = *std::max_element(map.data.begin(), map.data.end());
  for (int i = 0; i < 300; ++i) {
    double x = rng.uniform(0, 5), y = rng.uniform(0, 5);  // interior
    double out;
    bilinear_sample(map, x, y, 1.0, &out);
    EXPECT_GE(out, lo - 1e-12);
    EXPECT_LE(out, hi + 1e-12);
  }
}

TEST(TrilinearSample, VoxelCenter) {
  VoxelGrid<double> grid(2, 3, 3, 3);
  Rng rng(2);
  for (auto& v : grid.data) v = rng.normal();
  std::vector<double> out(2);
  trilinear_sample(grid, 1.0, 2.0, 0.0, out.data());
  EXPECT_DOUBLE_EQ(out[0], grid.at(0, 0, 2, 1));
  EXPECT_DOUBLE_EQ(out[1], grid.at(1, 0, 2, 1));
}

TEST(TrilinearSample, AlternatingBlockCenter) {
  VoxelGrid<double> grid(1, 2, 2, 2);
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) grid.at(0, z, y, x) = (x + y + z) % 2;
  double out;
  trilinear_sample(grid, 0.5, 0.5, 0.5, &out);
  EXPECT_DOUBLE_EQ(out, 0.5);
}

TEST(TrilinearSample, BruteForceOracle) {
  Rng rng(29);
  VoxelGrid<double> grid(2, 4, 5, 6);
  for (auto& v : grid.data) v = rng.normal();
  for (int trial = 0; trial < 500; ++trial) {
    double x = rng.uniform(-1, 7), y = rng.uniform(-1, 6), z = rng.uniform(-1, 5);
    std::vector<double> got(2);
    trilinear_sample(grid, x, y, z, got.data());
    int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y)),
        z0 = static_cast<int>(std::floor(z));
    double ax = x - x0, ay = y - y0, az = z - z0;
    for (int c = 0; c < 2; ++c) {
      auto value = [&](int xi, int yi, int zi) {
        if (xi < 0 || xi >= grid.nx || yi < 0 || yi >= grid.ny || zi < 0 || zi >= grid.nz)
          return 0.0;
        return grid.at(c, zi, yi, xi);
      };
      double want = 0;
      for (int k = 0; k < 8; ++k) {
        int dx = k & 1, dy = (k >> 1) & 1, dz = (k >> 2) & 1;
        want += (dx ? ax : 1 - ax) * (dy ? ay : 1 - ay) * (dz ? az : 1 - az) *
                value(x0 + dx, y0 + dy, z0 + dz);
      }
      EXPECT_NEAR(got[c], want, 1e-7);
    }
  }
}

TEST(ComputeAabb, UnitCubePadding) {
  std::vector<Vec3> corners;
  for (int i = 0; i < 8; ++i)
    corners.emplace_back(i & 1 ? 1 : 0, i & 2 ? 1 : 0, i & 4 ? 1 : 0);
  Aabb box = compute_aabb(corners, 0.05);
  EXPECT_TRUE(box.lo.isApprox(Vec3(-0.05, -0.05, -0.05)));
  EXPECT_TRUE(box.hi.isApprox(Vec3(1.05, 1.05, 1.05)));
}

TEST(ComputeAabb, DegenerateRejected) {
  std::vector<Vec3> single{{0.3, 0.4, 0.5}};
  EXPECT_THROW(compute_aabb(single, 0.0), ValidationError);
  EXPECT_THROW(compute_aabb({}, 0.1), ValidationError);
}

TEST(ComputeAabb, BodyExtentsArithmetic) {
  // 0.5 x 1.8 x 0.3 extents with 5 cm padding grow to 0.6 x 1.9 x 0.4.
  std::vector<Vec3> verts{{0, 0, 0}, {0.5, 1.8, 0.3}};
  Aabb box = compute_aabb(verts, 0.05);
  EXPECT_NEAR(box.extent().x(), 0.6, 1e-12);
  EXPECT_NEAR(box.extent().y(), 1.9, 1e-12);
  EXPECT_NEAR(box.extent().z(), 0.4, 1e-12);
}

TEST(RayAabb, AxisAlignedHit) {
  Ray ray;
  ray.origin = Vec3(-2, 0, 0);
  ray.direction = Vec3(1, 0, 0);
  Aabb box{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  auto hit = ray_aabb_intersect(ray, box);
  ASSERT_TRUE(hit.has_value());
  EXPECT_DOUBLE_EQ(hit->first, 1.0);
  EXPECT_DOUBLE_EQ(hit->second, 3.0);
}

TEST(RayAabb, Miss) {
  Ray ray;
  ray.origin = Vec3(-2, 5, 0);
  ray.direction = Vec3(1, 0, 0);
  Aabb box{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  EXPECT_FALSE(ray_aabb_intersect(ray, box).has_value());
}

TEST(RayAabb, OriginInsideClampsToZero) {
  Ray ray;
  ray.origin = Vec3(0, 0, 0);
  ray.direction = Vec3(0, 0, 1);
  Aabb box{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  auto hit = ray_aabb_intersect(ray, box);
  ASSERT_TRUE(hit.has_value());
  EXPECT_DOUBLE_EQ(hit->first, 0.0);
  EXPECT_DOUBLE_EQ(hit->second, 1.0);
}

TEST(RayAabb, MarchingOracle) {
  Rng rng(41);
  Aabb box{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  const double step = 1e-4;
  const double t_max = 8.0;
  int hits = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Ray ray;
    ray.origin = Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    if (box.contains(ray.origin)) continue;
    if (trial % 2 == 0) {
      // aim at the box so hits are well represented
      Vec3 inside(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9));
      ray.direction = (inside - ray.origin).normalized();
    } else {
      ray.direction = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    }
    auto hit = ray_aabb_intersect(ray, box);

    double march_in = -1, march_out = -1;
    for (double t = 0; t < t_max; t += step) {
      if (box.contains(ray.at(t))) {
        if (march_in < 0) march_in = t;
        march_out = t;
      }
    }
    if (march_in >= 0) {
      ASSERT_TRUE(hit.has_value());
      EXPECT_NEAR(hit->first, march_in, 1e-3);
      EXPECT_NEAR(hit->second, march_out, 1e-3);
      ++hits;
    } else if (hit) {
      // grazing intersection thinner than the marching step
      EXPECT_LE(hit->second - hit->first, 2 * step);
    }
  }
  EXPECT_GT(hits, 300);  // sanity: the sampler actually exercised hits
}

TEST(RayAabb, TranslationSymmetry) {
  Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    Ray ray;
    ray.origin = Vec3(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4));
    ray.direction = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    Aabb box{Vec3(-0.7, -1.1, -0.4), Vec3(0.8, 0.9, 1.2)};
    Vec3 shift(rng.normal(), rng.normal(), rng.normal());
    Ray moved = ray;
    moved.origin += shift;
    Aabb moved_box{box.lo + shift, box.hi + shift};
    auto a = ray_aabb_intersect(ray, box);
    auto b = ray_aabb_intersect(moved, moved_box);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) {
      EXPECT_NEAR(a->first, b->first, 1e-9);
      EXPECT_NEAR(a->second, b->second, 1e-9);
    }
  }
}

TEST(Camera, LookAtIsRigidAndUpright) {
  Rng rng(47);
  for (int i = 0; i < 50; ++i) {
    Vec3 eye(rng.uniform(-3, 3), rng.uniform(0.2, 2.5), rng.uniform(-3, 3));
    Vec3 target(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5));
    if ((target - eye).norm() < 0.5) continue;
    CameraView view = make_look_at_camera(eye, target, Vec3::UnitY(), 250.0, 256);
    validate_camera(view, "look_at");
    EXPECT_NEAR(view.rotation.determinant(), 1.0, 1e-9);
    // target projects to the principal point
    Vec3 cam = world_to_camera(target, view);
    EXPECT_GT(cam.z(), 0);
    Vec2 uv = project_to_image(cam, view.intrinsics);
    EXPECT_NEAR(uv.x(), 128, 1e-6);
    EXPECT_NEAR(uv.y(), 128, 1e-6);
    // a point above the target lands higher in the image (smaller v)
    Vec3 above = world_to_camera(target + Vec3(0, 0.2, 0), view);
    EXPECT_LT(project_to_image(above, view.intrinsics).y(), 128);
  }
}

}  // namespace
