// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#include <mhr/data/scene.hpp>
#include <mhr/data/synthetic.hpp>
#include <mhr/geometry/aabb.hpp>
#include <mhr/mesh/visibility.hpp>
#include <mhr/render/renderer.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support/test_utils.hpp"

using namespace mhr;
namespace fs = std::filesystem;

namespace {

SyntheticSubjectConfig small_config() {
  SyntheticSubjectConfig config;
  config.frames = 1;
  config.camera_count = 6;
  config.seed = 42;
  return config;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TEST(Synthetic, VertexCountPresets) {
  for (int count : {2502, 6890}) {
    SyntheticSubjectConfig config = small_config();
    config.vertex_count = count;
    SyntheticSubject subject =
        build_synthetic_subject(config, 0, default_part_albedos(1));
    EXPECT_EQ(subject.template_mesh.vertex_count(), count);
  }
}

TEST(Synthetic, MeshIsWatertight) {
  SyntheticSubject subject =
      build_synthetic_subject(small_config(), 0, default_part_albedos(7));
  std::vector<int> euler = euler_characteristics(subject.template_mesh);
  EXPECT_EQ(euler.size(), static_cast<size_t>(kBodyPartCount));
  for (int chi : euler) EXPECT_EQ(chi, 2);
}

TEST(Synthetic, DeterministicByteIdenticalScene) {
  SyntheticSubjectConfig config = small_config();
  fs::path dir_a = fs::path(testing::TempDir()) / "mhr_scene_a";
  fs::path dir_b = fs::path(testing::TempDir()) / "mhr_scene_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  generate_synthetic_scene(config, dir_a);
  generate_synthetic_scene(config, dir_b);

  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir_a)) {
    if (!entry.is_regular_file()) continue;
    fs::path rel = fs::relative(entry.path(), dir_a);
    ASSERT_TRUE(fs::exists(dir_b / rel)) << rel;
    EXPECT_EQ(slurp(entry.path()), slurp(dir_b / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 1 + 6 + 6 + 1);  // json + images + masks + mesh
}

TEST(Synthetic, MaskMatchesRasterizerHits) {
  GeneratedScene generated = generate_synthetic_scene(small_config());
  const Frame& frame = generated.scene.frames[0];
  for (const CameraView& view : frame.views) {
    DepthBuffer depth =
        rasterize_mesh(generated.render_meshes[0], view, view.image.width, view.image.height);
    for (int v = 0; v < view.mask.height; ++v)
      for (int u = 0; u < view.mask.width; ++u)
        ASSERT_EQ(view.mask.at(u, v) != 0, std::isfinite(depth.at(u, v)))
            << "pixel " << u << "," << v;
  }
}

TEST(Synthetic, AllCamerasSeeSubject) {
  GeneratedScene generated = generate_synthetic_scene(small_config());
  const Frame& frame = generated.scene.frames[0];
  Aabb box = compute_aabb(frame.mesh.vertices, kVolumePadding);
  for (const CameraView& view : frame.views) {
    std::vector<PixelCoord> fp = footprint_pixels(view, box);
    EXPECT_GT(fp.size(), 500u) << "view " << view.view_id;
    long fg = 0;
    for (auto m : view.mask.on) fg += m;
    EXPECT_GT(fg, 1000) << "view " << view.view_id;
  }
}

TEST(Synthetic, GtColorsMatchAssignedAlbedos) {
  GeneratedScene generated = generate_synthetic_scene(small_config());
  const Frame& frame = generated.scene.frames[0];
  VisibilityTable table = compute_vertex_visibility(frame.mesh, frame.views);
  VertexColors colors = compute_gt_vertex_colors(frame.mesh, frame.views, table);

  double err_sum = 0;
  int counted = 0;
  for (int i = 0; i < frame.mesh.vertex_count(); ++i) {
    int seen = 0;
    for (int j = 0; j < table.view_count; ++j) seen += table.at(i, j);
    if (seen < 2) continue;
    err_sum +=
        (colors.rgb.row(i).transpose() - generated.vertex_albedo[0][i]).cwiseAbs().mean();
    ++counted;
  }
  ASSERT_GT(counted, 500);
  EXPECT_LT(err_sum / counted, 0.08);  // shading variation bound
}

TEST(SceneIo, LosslessRoundTrip) {
  SyntheticSubjectConfig config = small_config();
  fs::path dir = fs::path(testing::TempDir()) / "mhr_scene_rt";
  fs::remove_all(dir);
  GeneratedScene generated = generate_synthetic_scene(config, dir);
  Scene loaded = load_scene(dir);

  ASSERT_EQ(loaded.frames.size(), generated.scene.frames.size());
  EXPECT_EQ(loaded.vertex_count, config.vertex_count);
  for (size_t f = 0; f < loaded.frames.size(); ++f) {
    const Frame& a = generated.scene.frames[f];
    const Frame& b = loaded.frames[f];
    ASSERT_EQ(a.views.size(), b.views.size());
    EXPECT_LT((a.root - b.root).norm(), 1e-9);
    for (size_t v = 0; v < a.views.size(); ++v) {
      EXPECT_LT((a.views[v].intrinsics - b.views[v].intrinsics).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LT((a.views[v].rotation - b.views[v].rotation).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LT((a.views[v].translation - b.views[v].translation).norm(), 1e-9);
      // images go through 8-bit quantization once; reloading is exact
      for (size_t i = 0; i < a.views[v].image.rgb.size(); ++i) {
        float quantized = quantize8(a.views[v].image.rgb[i]) / 255.f;
        ASSERT_FLOAT_EQ(b.views[v].image.rgb[i], quantized);
      }
      EXPECT_EQ(a.views[v].mask.on, b.views[v].mask.on);
    }
    for (int i = 0; i < a.mesh.vertex_count(); ++i)
      EXPECT_LT((a.mesh.vertices[i] - b.mesh.vertices[i]).norm(), 1e-7);
  }
}

TEST(SceneIo, CorruptedRotationNamesView) {
  fs::path dir = fs::path(testing::TempDir()) / "mhr_scene_bad";
  fs::remove_all(dir);
  generate_synthetic_scene(small_config(), dir);

  // flip one rotation to det = -1
  std::ifstream in(dir / "scene.json");
  nlohmann::json root;
  in >> root;
  in.close();
  auto& R = root["frames"][0]["views"][2]["R"];
  for (int j = 0; j < 3; ++j) R[j] = -R[j].get<double>();
  std::ofstream out(dir / "scene.json");
  out << root.dump(2);
  out.close();

  try {
    load_scene(dir);
    FAIL() << "expected validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("view 2"), std::string::npos) << e.what();
  }
}

TEST(SceneIo, GtColorCacheRoundTrip) {
  VertexColors colors;
  colors.rgb.resize(5, 3);
  Rng rng(9);
  for (int i = 0; i < 5; ++i)
    for (int c = 0; c < 3; ++c) colors.rgb(i, c) = rng.uniform();
  colors.valid = {1, 0, 1, 1, 0};
  std::string path = testing::TempDir() + "mhr_colors.f32";
  save_gt_vertex_colors(path, colors);
  VertexColors loaded = load_gt_vertex_colors(path, 5);
  EXPECT_EQ(loaded.valid, colors.valid);
  for (int i = 0; i < 5; ++i)
    for (int c = 0; c < 3; ++c)
      EXPECT_FLOAT_EQ(static_cast<float>(loaded.rgb(i, c)),
                      static_cast<float>(colors.rgb(i, c)));
}

TEST(Synthetic, LooseClothingInflatesRenderSurfaceOnly) {
  SyntheticSubjectConfig config = small_config();
  config.loose_clothing = true;
  SyntheticSubject subject = build_synthetic_subject(config, 0, default_part_albedos(3));
  double max_shift = 0, min_shift = 1e9;
  for (int i = 0; i < subject.template_mesh.vertex_count(); ++i) {
    double d =
        (subject.render_mesh.vertices[i] - subject.template_mesh.vertices[i]).norm();
    max_shift = std::max(max_shift, d);
    min_shift = std::min(min_shift, d);
  }
  EXPECT_NEAR(max_shift, config.loose_offset, 1e-9);
  EXPECT_NEAR(min_shift, config.loose_offset, 1e-9);
}

TEST(Synthetic, InvalidConfigRejected) {
  SyntheticSubjectConfig config = small_config();
  config.camera_count = 3;
  EXPECT_THROW(config.validate(), ValidationError);
  config = small_config();
  config.vertex_count = 1234;
  EXPECT_THROW(config.validate(), ValidationError);
}

}  // namespace
