// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/geometry/aabb.hpp>
#include <mhr/geometry/camera.hpp>
#include <mhr/model/features.hpp>
#include <mhr/model/model.hpp>
#include <mhr/model/sparse_volume.hpp>
#include <mhr/render/composite.hpp>

#include <optional>
#include <vector>

namespace mhr {

struct PixelCoord {
  int u = 0, v = 0;
};

// Rays of one target view, bounded by the mesh box. Ground-truth colors come
// from the masked target image (background supervises toward black).
struct RayBatch {
  std::vector<Ray> rays;
  std::vector<PixelCoord> pixels;
  MatX<double> gt_colors;            // B x 3
  std::vector<PixelCoord> dropped;   // requested pixels whose rays miss the box
};

inline Ray pixel_ray(const CameraView& view, double u, double v) {
  Ray ray;
  ray.origin = view.center();
  Vec3 d_cam = unproject_pixel({u, v}, 1.0, view.intrinsics);
  ray.direction = (view.rotation.transpose() * d_cam).normalized();
  return ray;
}

// World-frame rays through the given pixels; rays that miss the box are
// dropped and reported.
inline RayBatch generate_rays(const CameraView& target_view, const Aabb& mesh_aabb,
                              const std::vector<PixelCoord>& pixel_set) {
  RayBatch batch;
  std::vector<Eigen::Vector3d> colors;
  for (const PixelCoord& px : pixel_set) {
    Ray ray = pixel_ray(target_view, px.u, px.v);
    auto hit = ray_aabb_intersect(ray, mesh_aabb);
    if (!hit) {
      batch.dropped.push_back(px);
      continue;
    }
    ray.z_near = hit->first;
    ray.z_far = hit->second;
    batch.rays.push_back(ray);
    batch.pixels.push_back(px);
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    if (target_view.image.contains(px.u, px.v) && target_view.mask.at(px.u, px.v)) {
      const float* p = target_view.image.pixel(px.u, px.v);
      c = Eigen::Vector3d(p[0], p[1], p[2]);
    }
    colors.push_back(c);
  }
  batch.gt_colors.resize(static_cast<Eigen::Index>(colors.size()), 3);
  for (size_t i = 0; i < colors.size(); ++i) batch.gt_colors.row(i) = colors[i].transpose();
  return batch;
}

// All pixels of the view whose rays intersect the box. Weight-independent,
// so trainers cache it per (frame, view).
inline std::vector<PixelCoord> footprint_pixels(const CameraView& view, const Aabb& aabb) {
  std::vector<PixelCoord> out;
  for (int v = 0; v < view.image.height; ++v)
    for (int u = 0; u < view.image.width; ++u) {
      Ray ray = pixel_ray(view, u, v);
      if (ray_aabb_intersect(ray, aabb)) out.push_back({u, v});
    }
  return out;
}

// Everything derived once per (model weights, input view, mesh fit):
// feature map, mesh feature, sparse volume, CNN taps and densified grids.
// Rendering any number of ray batches reuses one encoder pass.
template <class T>
struct RenderContext {
  Model<T>* model = nullptr;
  const CameraView* input_view = nullptr;
  bool train = false;

  FeatureMap<T> feature_map;
  MeshFeature<T> mesh_feature;
  std::vector<Vec3> mesh_cam;
  Vec3 root_cam = Vec3::Zero();
  SparseFeatureVolume<T> volume;
  CnnTaps<T> taps;
  MeshVolumes<T> volumes;
  Aabb world_aabb;
};

template <class T>
inline RenderContext<T> build_render_context(Model<T>& model, const CameraView& input_view,
                                             const std::vector<Vec3>& mesh_world,
                                             const Vec3& root_world, bool train) {
  RenderContext<T> ctx;
  ctx.model = &model;
  ctx.input_view = &input_view;
  ctx.train = train;

  Image masked = apply_mask(input_view.image, input_view.mask);
  ctx.feature_map = model.encoder.forward(masked, train);

  ctx.mesh_cam.resize(mesh_world.size());
  for (size_t i = 0; i < mesh_world.size(); ++i)
    ctx.mesh_cam[i] = world_to_camera(mesh_world[i], input_view);
  ctx.root_cam = world_to_camera(root_world, input_view);

  ctx.mesh_feature = compute_mesh_feature(ctx.feature_map, input_view.intrinsics,
                                          ctx.mesh_cam, ctx.root_cam);
  ctx.volume = build_sparse_volume(ctx.mesh_feature.rows, ctx.mesh_cam);
  ctx.taps = model.cnn.forward(ctx.volume, train);
  ctx.volumes = MeshVolumes<T>::densify(ctx.taps);
  ctx.world_aabb = compute_aabb(mesh_world, kVolumePadding);
  return ctx;
}

namespace detail {

// Per-chunk query tensors shared by the eval and train paths.
template <class T>
struct QueryBlock {
  std::vector<Vec3> x_cam;
  MatX<T> density_in;   // n x 257: [voxel | pixel | z]
  MatX<T> texture_in;   // n x 69:  [pixel | z | dir | sigma]
  PixelFeatureBatch<T> pixel_feats;
  std::vector<VoxelSampleTaps> voxel_taps;
  VecX<T> sigmas;
  MatX<T> rgb;          // n x 3
};

template <class T>
inline void build_queries(const RenderContext<T>& ctx, const std::vector<Ray>& rays,
                          const std::vector<std::vector<double>>& depths, QueryBlock<T>& q,
                          bool keep_taps) {
  const CameraView& in_view = *ctx.input_view;
  size_t n = 0;
  for (const auto& d : depths) n += d.size();
  q.x_cam.resize(n);
  q.density_in.resize(n, DensityHead<T>::kInputDim);
  q.texture_in.resize(n, TextureHead<T>::kInputDim);
  if (keep_taps) q.voxel_taps.resize(n);

  size_t idx = 0;
  for (size_t r = 0; r < rays.size(); ++r) {
    Vec3 dir_cam = rotate_view_dir(rays[r].direction, in_view);
    for (double z : depths[r]) {
      Vec3 x_world = rays[r].at(z);
      Vec3 x_cam = world_to_camera(x_world, in_view);
      q.x_cam[idx] = x_cam;
      T z_rel = static_cast<T>(root_relative_depth(x_cam, ctx.root_cam));
      sample_voxel_feature(ctx.volumes, ctx.volume.to_voxel(x_cam),
                           q.density_in.row(idx).data(),
                           keep_taps ? &q.voxel_taps[idx] : nullptr);
      q.density_in(idx, kVoxelFeatureDim + kPixelFeatureDim) = z_rel;
      q.texture_in(idx, kPixelFeatureDim) = z_rel;
      for (int a = 0; a < 3; ++a)
        q.texture_in(idx, kPixelFeatureDim + 1 + a) = static_cast<T>(dir_cam[a]);
      ++idx;
    }
  }

  q.pixel_feats =
      compute_pixel_features(ctx.feature_map, in_view.intrinsics, q.x_cam);
  q.density_in.middleCols(kVoxelFeatureDim, kPixelFeatureDim) = q.pixel_feats.features;
  q.texture_in.leftCols(kPixelFeatureDim) = q.pixel_feats.features;
}

template <class T>
inline void run_heads(RenderContext<T>& ctx, QueryBlock<T>& q, bool cache) {
  MatX<T> sigma_col = ctx.model->density.forward(q.density_in, cache);
  q.sigmas = sigma_col.col(0);
  q.texture_in.col(TextureHead<T>::kSigmaColumn) = q.sigmas;
  q.rgb = ctx.model->texture.forward(q.texture_in, cache);
}

}  // namespace detail

// Deterministic eval-mode render of a ray batch: midpoint depth sampling,
// running batchnorm statistics (fixed by context build), no caches.
template <class T>
inline MatX<T> render_rays(RenderContext<T>& ctx, const RayBatch& batch,
                           int samples_per_ray = kSamplesPerRay,
                           VecX<T>* opacities = nullptr) {
  const size_t b = batch.rays.size();
  MatX<T> out(b, 3);
  if (opacities) opacities->resize(b);
  const size_t chunk = 4096;
  for (size_t start = 0; start < b; start += chunk) {
    size_t count = std::min(chunk, b - start);
    std::vector<Ray> rays(batch.rays.begin() + start, batch.rays.begin() + start + count);
    std::vector<std::vector<double>> depths(count);
    for (size_t r = 0; r < count; ++r)
      depths[r] = stratified_depths(rays[r].z_near, rays[r].z_far, samples_per_ray,
                                    /*stratified=*/false, nullptr);
    detail::QueryBlock<T> q;
    detail::build_queries(ctx, rays, depths, q, /*keep_taps=*/false);
    detail::run_heads(ctx, q, /*cache=*/false);

    size_t idx = 0;
    for (size_t r = 0; r < count; ++r) {
      const int n = samples_per_ray;
      VecX<T> sig = q.sigmas.segment(idx, n);
      MatX<T> col = q.rgb.middleRows(idx, n);
      VecX<T> deltas(n);
      for (int i = 0; i + 1 < n; ++i)
        deltas[i] = static_cast<T>(depths[r][i + 1] - depths[r][i]);
      deltas[n - 1] = static_cast<T>(rays[r].z_far - depths[r][n - 1]);
      CompositeResult<T> res = composite(sig, col, deltas);
      out.row(start + r) = res.color.transpose();
      if (opacities) (*opacities)[start + r] = res.opacity;
      idx += n;
    }
  }
  return out;
}

// Training-mode render with immediate backward: returns the summed rendering
// loss over the batch and accumulates gradients into the feature map, the
// mesh volumes and the head parameters. Stratified depth jitter from `rng`.
template <class T>
inline T render_rays_train(RenderContext<T>& ctx, const RayBatch& batch, Rng& rng,
                           FeatureMap<T>& grad_feature_map, MeshVolumes<T>& grad_volumes,
                           int samples_per_ray = kSamplesPerRay) {
  MHR_CHECK(ctx.train);
  const size_t b = batch.rays.size();
  T loss = T(0);
  const size_t chunk = 256;  // rays per block; fixed so accumulation order is stable
  for (size_t start = 0; start < b; start += chunk) {
    size_t count = std::min(chunk, b - start);
    std::vector<Ray> rays(batch.rays.begin() + start, batch.rays.begin() + start + count);
    std::vector<std::vector<double>> depths(count);
    for (size_t r = 0; r < count; ++r)
      depths[r] = stratified_depths(rays[r].z_near, rays[r].z_far, samples_per_ray,
                                    /*stratified=*/true, &rng);
    detail::QueryBlock<T> q;
    detail::build_queries(ctx, rays, depths, q, /*keep_taps=*/true);
    detail::run_heads(ctx, q, /*cache=*/true);

    const size_t n_pts = q.x_cam.size();
    VecX<T> grad_sigma_comp = VecX<T>::Zero(n_pts);
    MatX<T> grad_rgb = MatX<T>::Zero(n_pts, 3);

    size_t idx = 0;
    for (size_t r = 0; r < count; ++r) {
      const int n = samples_per_ray;
      VecX<T> sig = q.sigmas.segment(idx, n);
      MatX<T> col = q.rgb.middleRows(idx, n);
      VecX<T> deltas(n);
      for (int i = 0; i + 1 < n; ++i)
        deltas[i] = static_cast<T>(depths[r][i + 1] - depths[r][i]);
      deltas[n - 1] = static_cast<T>(rays[r].z_far - depths[r][n - 1]);
      CompositeResult<T> res = composite(sig, col, deltas);

      Vec3T<T> gt = batch.gt_colors.row(start + r).template cast<T>().transpose();
      Vec3T<T> diff = res.color - gt;
      loss += diff.squaredNorm();
      Vec3T<T> grad_c = T(2) * diff;

      VecX<T> ds;
      MatX<T> dc;
      composite_backward(sig, col, deltas, grad_c, ds, dc);
      grad_sigma_comp.segment(idx, n) = ds;
      grad_rgb.middleRows(idx, n) = dc;
      idx += n;
    }

    // Texture backward; sigma picks up its conditioning gradient here.
    MatX<T> grad_tex_in = ctx.model->texture.backward(grad_rgb);
    VecX<T> grad_sigma = grad_sigma_comp + grad_tex_in.col(TextureHead<T>::kSigmaColumn);
    MatX<T> grad_density_in = ctx.model->density.backward(grad_sigma);

    // Pixel features feed both heads.
    MatX<T> grad_pixel =
        grad_density_in.middleCols(kVoxelFeatureDim, kPixelFeatureDim) +
        grad_tex_in.leftCols(kPixelFeatureDim);
    scatter_pixel_feature_grads(q.pixel_feats, grad_pixel, grad_feature_map);

    for (size_t i = 0; i < n_pts; ++i)
      scatter_voxel_feature_grads(grad_volumes, q.voxel_taps[i],
                                  grad_density_in.row(i).data());
  }
  return loss;
}

// Full-image eval render; pixels whose rays miss the box stay black.
template <class T>
inline Image render_view(RenderContext<T>& ctx, const CameraView& target_view,
                         int samples_per_ray = kSamplesPerRay) {
  std::vector<PixelCoord> all;
  all.reserve(static_cast<size_t>(target_view.image.width) * target_view.image.height);
  for (int v = 0; v < target_view.image.height; ++v)
    for (int u = 0; u < target_view.image.width; ++u) all.push_back({u, v});
  RayBatch batch = generate_rays(target_view, ctx.world_aabb, all);
  MatX<T> colors = render_rays(ctx, batch, samples_per_ray);
  Image img(target_view.image.width, target_view.image.height);
  for (size_t i = 0; i < batch.pixels.size(); ++i) {
    float* p = img.pixel(batch.pixels[i].u, batch.pixels[i].v);
    for (int c = 0; c < 3; ++c) p[c] = static_cast<float>(colors(i, c));
  }
  return img;
}

}  // namespace mhr
