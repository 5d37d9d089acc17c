// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/core/rng.hpp>
#include <mhr/model/heads.hpp>
#include <mhr/model/inpainter.hpp>
#include <mhr/model/sparse_cnn.hpp>
#include <mhr/nn/resnet.hpp>

#include <string>
#include <vector>

namespace mhr {

// Buffer view used for checkpointing non-learnable state (batchnorm running
// statistics).
template <class T>
using BufferList = std::vector<std::pair<std::string, std::pair<T*, size_t>>>;

// The full network: image encoder, vertex-color head, sparse-volume geometry
// branch and the view-dependent texture branch. Checkpoint segments follow
// the same split.
template <class T>
struct Model {
  ResnetEncoder<T> encoder;
  MeshInpainter<T> inpainter;
  SparseCnn<T> cnn;
  DensityHead<T> density;
  TextureHead<T> texture;

  Model() = default;
  explicit Model(Rng& rng)
      : encoder(rng), inpainter(rng), cnn(rng), density(rng), texture(rng) {}

  ParamList<T> params_encoder() {
    ParamList<T> out;
    encoder.visit_params("encoder", out);
    return out;
  }
  ParamList<T> params_inpainter() {
    ParamList<T> out;
    inpainter.visit_params("inpainter", out);
    return out;
  }
  ParamList<T> params_geometry() {
    ParamList<T> out;
    cnn.visit_params("geometry.cnn", out);
    density.visit_params("geometry.density", out);
    return out;
  }
  ParamList<T> params_texture() {
    ParamList<T> out;
    texture.visit_params("texture", out);
    return out;
  }
  ParamList<T> all_params() {
    ParamList<T> out;
    encoder.visit_params("encoder", out);
    inpainter.visit_params("inpainter", out);
    cnn.visit_params("geometry.cnn", out);
    density.visit_params("geometry.density", out);
    texture.visit_params("texture", out);
    return out;
  }
  BufferList<T> all_buffers() {
    BufferList<T> out;
    encoder.visit_buffers("encoder", out);
    cnn.visit_buffers("geometry.cnn", out);
    return out;
  }
};

}  // namespace mhr
