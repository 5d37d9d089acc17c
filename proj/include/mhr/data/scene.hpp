// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/core/png_io.hpp>
#include <mhr/geometry/camera.hpp>
#include <mhr/mesh/trimesh.hpp>
#include <mhr/model/inpainter.hpp>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace mhr {

// On-disk multi-view scene:
//   scene.json                       frame/view index (K, R, t row-major)
//   images/f%03d_v%02d.png           8-bit RGB
//   masks/f%03d_v%02d.png            8-bit gray, 0/255
//   meshes/f%03d.obj                 template fit, meters
//   cache/gt_vertex_colors_f%03d.f32 M x 3 float32 LE + M validity bytes

struct Frame {
  std::vector<CameraView> views;
  TriMesh mesh;
  Vec3 root = Vec3::Zero();
  std::optional<VertexColors> gt_vertex_colors;
};

struct Scene {
  std::filesystem::path dir;
  int vertex_count = 0;
  std::vector<Frame> frames;
};

inline std::string frame_view_name(int frame, int view) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "f%03d_v%02d.png", frame, view);
  return buf;
}
inline std::string frame_mesh_name(int frame) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "f%03d.obj", frame);
  return buf;
}
inline std::string gt_color_cache_name(int frame) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "gt_vertex_colors_f%03d.f32", frame);
  return buf;
}

inline void save_gt_vertex_colors(const std::string& path, const VertexColors& colors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write color cache: " + path);
  const Eigen::Index m = colors.rgb.rows();
  for (Eigen::Index i = 0; i < m; ++i)
    for (int c = 0; c < 3; ++c) {
      float v = static_cast<float>(colors.rgb(i, c));
      out.write(reinterpret_cast<const char*>(&v), sizeof(float));
    }
  out.write(reinterpret_cast<const char*>(colors.valid.data()),
            static_cast<std::streamsize>(colors.valid.size()));
}

inline VertexColors load_gt_vertex_colors(const std::string& path, int vertex_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open color cache: " + path);
  VertexColors colors;
  colors.rgb.resize(vertex_count, 3);
  for (int i = 0; i < vertex_count; ++i)
    for (int c = 0; c < 3; ++c) {
      float v;
      in.read(reinterpret_cast<char*>(&v), sizeof(float));
      colors.rgb(i, c) = v;
    }
  colors.valid.resize(vertex_count);
  in.read(reinterpret_cast<char*>(colors.valid.data()), vertex_count);
  if (!in) throw ValidationError("color cache truncated: " + path);
  return colors;
}

inline void save_scene(const Scene& scene) {
  namespace fs = std::filesystem;
  fs::create_directories(scene.dir / "images");
  fs::create_directories(scene.dir / "masks");
  fs::create_directories(scene.dir / "meshes");
  fs::create_directories(scene.dir / "cache");

  nlohmann::ordered_json root;
  root["frame_count"] = static_cast<int>(scene.frames.size());
  root["vertex_count"] = scene.vertex_count;
  nlohmann::ordered_json frames = nlohmann::ordered_json::array();
  for (size_t f = 0; f < scene.frames.size(); ++f) {
    const Frame& frame = scene.frames[f];
    nlohmann::ordered_json jf;
    jf["mesh"] = "meshes/" + frame_mesh_name(static_cast<int>(f));
    jf["root"] = {frame.root.x(), frame.root.y(), frame.root.z()};
    nlohmann::ordered_json views = nlohmann::ordered_json::array();
    for (size_t v = 0; v < frame.views.size(); ++v) {
      const CameraView& view = frame.views[v];
      nlohmann::ordered_json jv;
      jv["image"] = "images/" + frame_view_name(static_cast<int>(f), static_cast<int>(v));
      jv["mask"] = "masks/" + frame_view_name(static_cast<int>(f), static_cast<int>(v));
      std::vector<double> K(view.intrinsics.data(), view.intrinsics.data() + 9);
      // Eigen default storage is column-major; emit row-major explicitly.
      jv["K"] = {view.intrinsics(0, 0), view.intrinsics(0, 1), view.intrinsics(0, 2),
                 view.intrinsics(1, 0), view.intrinsics(1, 1), view.intrinsics(1, 2),
                 view.intrinsics(2, 0), view.intrinsics(2, 1), view.intrinsics(2, 2)};
      jv["R"] = {view.rotation(0, 0), view.rotation(0, 1), view.rotation(0, 2),
                 view.rotation(1, 0), view.rotation(1, 1), view.rotation(1, 2),
                 view.rotation(2, 0), view.rotation(2, 1), view.rotation(2, 2)};
      jv["t"] = {view.translation.x(), view.translation.y(), view.translation.z()};
      views.push_back(jv);
      save_image_png((scene.dir / jv["image"].get<std::string>()).string(), view.image);
      save_mask_png((scene.dir / jv["mask"].get<std::string>()).string(), view.mask);
    }
    jf["views"] = views;
    frames.push_back(jf);
    save_obj((scene.dir / jf["mesh"].get<std::string>()).string(), frame.mesh);
    if (frame.gt_vertex_colors)
      save_gt_vertex_colors(
          (scene.dir / "cache" / gt_color_cache_name(static_cast<int>(f))).string(),
          *frame.gt_vertex_colors);
  }
  root["frames"] = frames;
  std::ofstream out(scene.dir / "scene.json");
  out << root.dump(2) << "\n";
}

inline Scene load_scene(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::ifstream in(dir / "scene.json");
  if (!in) throw ValidationError("cannot open " + (dir / "scene.json").string());
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scene.json parse error: " + std::string(e.what()));
  }

  Scene scene;
  scene.dir = dir;
  scene.vertex_count = root.at("vertex_count").get<int>();
  int frame_count = root.at("frame_count").get<int>();
  const auto& jframes = root.at("frames");
  if (static_cast<int>(jframes.size()) != frame_count)
    throw ValidationError("scene.json: frame_count does not match frames array");

  for (int f = 0; f < frame_count; ++f) {
    const auto& jf = jframes.at(f);
    Frame frame;
    frame.mesh = load_obj((dir / jf.at("mesh").get<std::string>()).string());
    if (frame.mesh.vertex_count() != scene.vertex_count)
      throw ValidationError("frame " + std::to_string(f) + ": mesh vertex count " +
                            std::to_string(frame.mesh.vertex_count()) +
                            " != scene vertex_count " + std::to_string(scene.vertex_count));
    auto r = jf.at("root");
    frame.root = Vec3(r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>());

    int view_idx = 0;
    for (const auto& jv : jf.at("views")) {
      CameraView view;
      view.view_id = view_idx;
      auto K = jv.at("K");
      auto R = jv.at("R");
      auto t = jv.at("t");
      if (K.size() != 9 || R.size() != 9 || t.size() != 3)
        throw ValidationError("frame " + std::to_string(f) + " view " +
                              std::to_string(view_idx) + ": K/R/t size mismatch");
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          view.intrinsics(i, j) = K.at(i * 3 + j).get<double>();
          view.rotation(i, j) = R.at(i * 3 + j).get<double>();
        }
      for (int i = 0; i < 3; ++i) view.translation[i] = t.at(i).get<double>();

      std::string where = (dir / "scene.json").string() + ": frame " + std::to_string(f) +
                          " view " + std::to_string(view_idx);
      validate_camera(view, where);
      view.image = load_image_png((dir / jv.at("image").get<std::string>()).string());
      view.mask = load_mask_png((dir / jv.at("mask").get<std::string>()).string());
      if (view.image.width != view.mask.width || view.image.height != view.mask.height)
        throw ValidationError(where + ": image/mask size mismatch");
      if (view.image.width != kInputImageSize || view.image.height != kInputImageSize)
        throw ValidationError(where + ": views must be " +
                              std::to_string(kInputImageSize) + "x" +
                              std::to_string(kInputImageSize));
      frame.views.push_back(std::move(view));
      ++view_idx;
    }
    if (frame.views.empty())
      throw ValidationError("frame " + std::to_string(f) + ": no views");

    fs::path cache = dir / "cache" / gt_color_cache_name(f);
    if (fs::exists(cache))
      frame.gt_vertex_colors = load_gt_vertex_colors(cache.string(), scene.vertex_count);
    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

}  // namespace mhr
