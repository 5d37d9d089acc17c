// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/keyval.hpp>
#include <mhr/core/rng.hpp>
#include <mhr/data/scene.hpp>
#include <mhr/mesh/rasterizer.hpp>
#include <mhr/mesh/trimesh.hpp>

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace mhr {

// Articulated capsule-and-ellipsoid subject rendered by the depth-buffered
// rasterizer. The template fit written to disk IS the true surface unless
// loose-clothing mode inflates the rendered surface beyond it.

inline constexpr int kBodyPartCount = 10;
inline const char* kBodyPartNames[kBodyPartCount] = {
    "torso", "head", "uarm_l", "uarm_r", "fore_l",
    "fore_r", "thigh_l", "thigh_r", "shin_l", "shin_r"};

struct SyntheticSubjectConfig {
  int frames = 1;
  int vertex_count = 2502;  // 2502 fast preset or 6890 full-template preset
  int image_size = kInputImageSize;
  int camera_count = 8;
  double camera_radius = 2.2;
  double camera_height = 1.3;
  double focal = 260.0;
  double body_scale = 1.0;
  double texture_amp = 0.25;
  int texture_stripes = 6;
  double pose_delta = 0.25;  // per-frame limb swing increment (radians)
  // arm_l, arm_r, fore_l, fore_r, leg_l, leg_r, shin_l, shin_r
  std::array<double, 8> pose{0.35, -0.25, 0.25, -0.2, 0.12, -0.12, 0.1, -0.1};
  bool loose_clothing = false;
  double loose_offset = 0.02;
  std::uint64_t seed = 1;
  std::vector<Vec3> part_albedos;  // filled from seed when absent

  static SyntheticSubjectConfig from_keyval(const KeyValueFile& kv) {
    SyntheticSubjectConfig c;
    c.frames = static_cast<int>(kv.get_int("frames", c.frames));
    c.vertex_count = static_cast<int>(kv.get_int("vertex_count", c.vertex_count));
    c.image_size = static_cast<int>(kv.get_int("image_size", c.image_size));
    c.camera_count = static_cast<int>(kv.get_int("camera_count", c.camera_count));
    c.camera_radius = kv.get_double("camera_radius", c.camera_radius);
    c.camera_height = kv.get_double("camera_height", c.camera_height);
    c.focal = kv.get_double("focal", c.focal);
    c.body_scale = kv.get_double("body_scale", c.body_scale);
    c.texture_amp = kv.get_double("texture_amp", c.texture_amp);
    c.texture_stripes = static_cast<int>(kv.get_int("texture_stripes", c.texture_stripes));
    c.pose_delta = kv.get_double("pose_delta", c.pose_delta);
    const char* pose_keys[8] = {"pose_arm_l", "pose_arm_r", "pose_fore_l", "pose_fore_r",
                                "pose_leg_l", "pose_leg_r", "pose_shin_l", "pose_shin_r"};
    for (int i = 0; i < 8; ++i) c.pose[i] = kv.get_double(pose_keys[i], c.pose[i]);
    c.loose_clothing = kv.get_int("loose_clothing", 0) != 0;
    c.loose_offset = kv.get_double("loose_offset", c.loose_offset);
    c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long>(c.seed)));
    for (int p = 0; p < kBodyPartCount; ++p) {
      std::string key = std::string("albedo_") + kBodyPartNames[p];
      if (kv.has(key)) {
        auto v = kv.get_vector(key, {});
        if (v.size() != 3) throw ValidationError(key + ": expected r,g,b");
        if (c.part_albedos.empty()) c.part_albedos.resize(kBodyPartCount, Vec3(0.5, 0.5, 0.5));
        c.part_albedos[p] = Vec3(v[0], v[1], v[2]);
      }
    }
    c.validate();
    return c;
  }

  void validate() const {
    if (frames < 1) throw ValidationError("synthetic config: frames must be >= 1");
    if (camera_count < 5) throw ValidationError("synthetic config: camera ring needs >= 5 cameras");
    if (vertex_count != 2502 && vertex_count != 6890)
      throw ValidationError("synthetic config: vertex_count must be 2502 or 6890");
    if (image_size != kInputImageSize)
      throw ValidationError("synthetic config: image_size must be 256");
    if (camera_radius <= 0 || focal <= 0 || body_scale <= 0)
      throw ValidationError("synthetic config: radius/focal/scale must be positive");
    for (const Vec3& a : part_albedos)
      if ((a.array() < 0).any() || (a.array() > 1).any())
        throw ValidationError("synthetic config: albedos must lie in [0,1]");
  }
};

namespace detail {

struct PartSpec {
  int rings;
  int sectors;
  Vec3 center;
  Vec3 radii;
  Mat3 rot;
};

inline void append_uv_sphere(const PartSpec& part, const Vec3& albedo, double tex_amp,
                             int stripes, TriMesh& mesh, std::vector<Vec3>& colors) {
  const int base = mesh.vertex_count();
  const int R = part.rings, S = part.sectors;
  auto emit = [&](const Vec3& unit, double t) {
    Vec3 world = part.rot * unit.cwiseProduct(part.radii) + part.center;
    mesh.vertices.push_back(world);
    double stripe = 0.5 + 0.5 * std::sin(2.0 * M_PI * stripes * t);
    Vec3 c = albedo * (1.0 - tex_amp + tex_amp * stripe);
    colors.push_back(c.cwiseMax(0.0).cwiseMin(1.0));
  };
  emit(Vec3(0, 1, 0), 0.0);  // top pole
  for (int r = 1; r < R; ++r) {
    double phi = M_PI * r / R;
    for (int s = 0; s < S; ++s) {
      double theta = 2.0 * M_PI * s / S;
      emit(Vec3(std::sin(phi) * std::cos(theta), std::cos(phi),
                std::sin(phi) * std::sin(theta)),
           static_cast<double>(r) / R);
    }
  }
  emit(Vec3(0, -1, 0), 1.0);  // bottom pole
  const int bottom = mesh.vertex_count() - 1;

  auto ring_vertex = [&](int r, int s) { return base + 1 + (r - 1) * S + (s % S); };
  for (int s = 0; s < S; ++s)
    mesh.faces.push_back({base, ring_vertex(1, s + 1), ring_vertex(1, s)});
  for (int r = 1; r + 1 < R; ++r)
    for (int s = 0; s < S; ++s) {
      int a = ring_vertex(r, s), b = ring_vertex(r, s + 1);
      int c = ring_vertex(r + 1, s), d = ring_vertex(r + 1, s + 1);
      mesh.faces.push_back({a, b, c});
      mesh.faces.push_back({b, d, c});
    }
  for (int s = 0; s < S; ++s)
    mesh.faces.push_back({bottom, ring_vertex(R - 1, s), ring_vertex(R - 1, s + 1)});
}

inline Mat3 align_y_to(const Vec3& dir) {
  return Eigen::Quaterniond::FromTwoVectors(Vec3(0, 1, 0), dir).toRotationMatrix();
}

}  // namespace detail

struct SyntheticSubject {
  TriMesh template_mesh;           // the fit stored in the scene
  TriMesh render_mesh;             // true surface (inflated in loose mode)
  std::vector<Vec3> vertex_albedo; // assigned albedo per vertex (texture applied)
  Vec3 root = Vec3::Zero();
};

// Builds the posed subject for one frame. Limb chains articulate around
// shoulder/hip and elbow/knee pivots; the per-frame swing animates arms and
// legs in opposite phase.
inline SyntheticSubject build_synthetic_subject(const SyntheticSubjectConfig& config,
                                                int frame,
                                                const std::vector<Vec3>& albedos) {
  const double s = config.body_scale;
  const double swing = config.pose_delta * frame;
  std::array<double, 8> pose = config.pose;
  pose[0] += swing;
  pose[1] -= swing;
  pose[4] += 0.5 * swing;
  pose[5] -= 0.5 * swing;

  // Tessellation presets with exact vertex totals (2502 / 6890).
  struct Tess {
    int rings, sectors;
  };
  std::array<Tess, kBodyPartCount> tess{};
  if (config.vertex_count == 2502) {
    tess.fill({9, 31});       // 250 vertices per part
    tess[0] = {11, 25};       // torso: 252
  } else {
    tess.fill({21, 33});      // limbs: 662
    tess[0] = {11, 103};      // torso: 1032
    tess[1] = {17, 35};       // head: 562
  }

  const Vec3 shoulder_l(0.19 * s, 1.47 * s, 0), shoulder_r(-0.19 * s, 1.47 * s, 0);
  const Vec3 hip_l(0.095 * s, 0.93 * s, 0), hip_r(-0.095 * s, 0.93 * s, 0);
  const double uarm_len = 0.30 * s, fore_len = 0.27 * s;
  const double thigh_len = 0.42 * s, shin_len = 0.42 * s;

  auto arm_dir = [&](double angle) {
    return Vec3(std::sin(angle), -std::cos(angle), 0.12).normalized();
  };
  auto leg_dir = [&](double angle) {
    return Vec3(0, -std::cos(angle), std::sin(angle)).normalized();
  };

  Vec3 uarm_l_dir = arm_dir(pose[0]), uarm_r_dir = arm_dir(-pose[1]) .cwiseProduct(Vec3(-1, 1, 1));
  Vec3 elbow_l = shoulder_l + uarm_l_dir * uarm_len;
  Vec3 elbow_r = shoulder_r + uarm_r_dir * uarm_len;
  Vec3 fore_l_dir = arm_dir(pose[0] + pose[2]);
  Vec3 fore_r_dir = arm_dir(-pose[1] - pose[3]).cwiseProduct(Vec3(-1, 1, 1));

  Vec3 thigh_l_dir = leg_dir(pose[4]), thigh_r_dir = leg_dir(pose[5]);
  Vec3 knee_l = hip_l + thigh_l_dir * thigh_len;
  Vec3 knee_r = hip_r + thigh_r_dir * thigh_len;
  Vec3 shin_l_dir = leg_dir(pose[4] + pose[6]), shin_r_dir = leg_dir(pose[5] + pose[7]);

  auto limb = [&](const Vec3& joint, const Vec3& dir, double len, double radius,
                  const Tess& t) {
    return detail::PartSpec{t.rings, t.sectors, joint + dir * (len / 2),
                            Vec3(radius, len / 2 + radius, radius),
                            detail::align_y_to(-dir)};
  };

  std::array<detail::PartSpec, kBodyPartCount> parts{
      detail::PartSpec{tess[0].rings, tess[0].sectors, Vec3(0, 1.22 * s, 0),
                       Vec3(0.17 * s, 0.32 * s, 0.11 * s), Mat3::Identity()},
      detail::PartSpec{tess[1].rings, tess[1].sectors, Vec3(0, 1.66 * s, 0),
                       Vec3(0.105 * s, 0.125 * s, 0.11 * s), Mat3::Identity()},
      limb(shoulder_l, uarm_l_dir, uarm_len, 0.048 * s, tess[2]),
      limb(shoulder_r, uarm_r_dir, uarm_len, 0.048 * s, tess[3]),
      limb(elbow_l, fore_l_dir, fore_len, 0.042 * s, tess[4]),
      limb(elbow_r, fore_r_dir, fore_len, 0.042 * s, tess[5]),
      limb(hip_l, thigh_l_dir, thigh_len, 0.075 * s, tess[6]),
      limb(hip_r, thigh_r_dir, thigh_len, 0.075 * s, tess[7]),
      limb(knee_l, shin_l_dir, shin_len, 0.055 * s, tess[8]),
      limb(knee_r, shin_r_dir, shin_len, 0.055 * s, tess[9]),
  };

  SyntheticSubject subject;
  subject.root = Vec3(0, 0.95 * s, 0);
  for (int p = 0; p < kBodyPartCount; ++p)
    detail::append_uv_sphere(parts[p], albedos[p], config.texture_amp,
                             config.texture_stripes, subject.template_mesh,
                             subject.vertex_albedo);
  MHR_CHECK_MSG(subject.template_mesh.vertex_count() == config.vertex_count,
                "tessellation preset does not match vertex_count");

  subject.render_mesh = subject.template_mesh;
  if (config.loose_clothing) {
    std::vector<Vec3> normals = vertex_normals(subject.template_mesh);
    for (int i = 0; i < subject.render_mesh.vertex_count(); ++i)
      subject.render_mesh.vertices[i] += config.loose_offset * normals[i];
  }
  return subject;
}

inline std::vector<Vec3> default_part_albedos(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> albedos(kBodyPartCount);
  for (int p = 0; p < kBodyPartCount; ++p)
    albedos[p] = Vec3(rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85),
                      rng.uniform(0.15, 0.85));
  return albedos;
}

struct GeneratedScene {
  Scene scene;
  std::vector<std::vector<Vec3>> vertex_albedo;  // per frame
  std::vector<TriMesh> render_meshes;            // true surfaces per frame
};

// Renders the subject from a camera ring and assembles the scene in memory;
// call save_scene to write the directory layout.
inline GeneratedScene generate_synthetic_scene(const SyntheticSubjectConfig& config) {
  config.validate();
  std::vector<Vec3> albedos =
      config.part_albedos.empty() ? default_part_albedos(config.seed) : config.part_albedos;

  GeneratedScene out;
  out.scene.vertex_count = config.vertex_count;

  for (int f = 0; f < config.frames; ++f) {
    SyntheticSubject subject = build_synthetic_subject(config, f, albedos);
    std::vector<Vec3> render_normals = vertex_normals(subject.render_mesh);

    Frame frame;
    frame.mesh = subject.template_mesh;
    frame.root = subject.root;

    Vec3 target(0, 0.95 * config.body_scale, 0);
    for (int c = 0; c < config.camera_count; ++c) {
      double az = 2.0 * M_PI * c / config.camera_count;
      Vec3 eye(config.camera_radius * std::cos(az), config.camera_height,
               config.camera_radius * std::sin(az));
      CameraView view =
          make_look_at_camera(eye, target, Vec3::UnitY(), config.focal, config.image_size);
      view.view_id = c;
      view.image = Image(config.image_size, config.image_size);
      view.mask = Mask(config.image_size, config.image_size);

      ShadingBuffers shading;
      shading.color = &view.image;
      shading.mask = &view.mask;
      shading.vertex_colors = &subject.vertex_albedo;
      shading.vertex_normals = &render_normals;
      rasterize_mesh(subject.render_mesh, view, config.image_size, config.image_size,
                     &shading);
      frame.views.push_back(std::move(view));
    }
    out.scene.frames.push_back(std::move(frame));
    out.vertex_albedo.push_back(std::move(subject.vertex_albedo));
    out.render_meshes.push_back(std::move(subject.render_mesh));
  }
  return out;
}

inline GeneratedScene generate_synthetic_scene(const SyntheticSubjectConfig& config,
                                               const std::filesystem::path& out_dir) {
  GeneratedScene generated = generate_synthetic_scene(config);
  generated.scene.dir = out_dir;
  save_scene(generated.scene);
  return generated;
}

}  // namespace mhr
