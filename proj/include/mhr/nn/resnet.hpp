// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/core/image.hpp>
#include <mhr/geometry/grids.hpp>
#include <mhr/nn/batchnorm.hpp>
#include <mhr/nn/conv2d.hpp>

#include <array>
#include <vector>

namespace mhr {

// Residual block: conv3x3 -> bn -> relu -> conv3x3 -> bn, plus identity or
// 1x1-projected skip, relu on the sum.
template <class T>
class BasicBlock {
 public:
  BasicBlock() = default;
  BasicBlock(int in_c, int out_c, int stride, Rng& rng)
      : conv1_(in_c, out_c, 3, stride, 1, rng),
        bn1_(out_c),
        conv2_(out_c, out_c, 3, 1, 1, rng),
        bn2_(out_c),
        has_proj_(stride != 1 || in_c != out_c) {
    if (has_proj_) {
      proj_ = Conv2d<T>(in_c, out_c, 1, stride, 0, rng);
      proj_bn_ = BatchNorm2d<T>(out_c);
    }
  }

  MatX<T> forward(const MatX<T>& x, int h, int w, bool train, int& oh, int& ow) {
    oh = conv1_.out_size(h);
    ow = conv1_.out_size(w);
    MatX<T> m = bn1_.forward(conv1_.forward(x, h, w, train), train);
    m = m.cwiseMax(T(0));
    if (train) relu1_ = m;
    m = bn2_.forward(conv2_.forward(m, oh, ow, train), train);
    if (has_proj_)
      m += proj_bn_.forward(proj_.forward(x, h, w, train), train);
    else
      m += x;
    m = m.cwiseMax(T(0));
    if (train) out_ = m;
    return m;
  }

  MatX<T> backward(const MatX<T>& dy) {
    MatX<T> ds =
        dy.cwiseProduct(out_.unaryExpr([](T v) { return v > T(0) ? T(1) : T(0); }));
    out_.resize(0, 0);
    MatX<T> dm = conv2_.backward(bn2_.backward(ds));
    dm = dm.cwiseProduct(relu1_.unaryExpr([](T v) { return v > T(0) ? T(1) : T(0); }));
    relu1_.resize(0, 0);
    MatX<T> dx = conv1_.backward(bn1_.backward(dm));
    if (has_proj_)
      dx += proj_.backward(proj_bn_.backward(ds));
    else
      dx += ds;
    return dx;
  }

  void visit_params(const std::string& prefix, ParamList<T>& out) {
    conv1_.visit_params(prefix + ".conv1", out);
    bn1_.visit_params(prefix + ".bn1", out);
    conv2_.visit_params(prefix + ".conv2", out);
    bn2_.visit_params(prefix + ".bn2", out);
    if (has_proj_) {
      proj_.visit_params(prefix + ".proj", out);
      proj_bn_.visit_params(prefix + ".proj_bn", out);
    }
  }
  void visit_buffers(const std::string& prefix,
                     std::vector<std::pair<std::string, std::pair<T*, size_t>>>& out) {
    bn1_.visit_buffers(prefix + ".bn1", out);
    bn2_.visit_buffers(prefix + ".bn2", out);
    if (has_proj_) proj_bn_.visit_buffers(prefix + ".proj_bn", out);
  }

 private:
  Conv2d<T> conv1_;
  BatchNorm2d<T> bn1_;
  Conv2d<T> conv2_;
  BatchNorm2d<T> bn2_;
  bool has_proj_ = false;
  Conv2d<T> proj_;
  BatchNorm2d<T> proj_bn_;
  MatX<T> relu1_, out_;
};

// 18-layer-style residual encoder truncated before the classifier stage.
// Four taps -- stem output and the three residual stages -- are bilinearly
// upsampled to 128x128, concatenated to 512 channels and reduced to 64 by a
// 1x1 convolution. Input is the 3x256x256 masked image.
template <class T>
class ResnetEncoder {
 public:
  static constexpr int kInputSize = 256;
  static constexpr int kFeatureChannels = 64;
  static constexpr int kFeatureSize = 128;

  ResnetEncoder() = default;
  explicit ResnetEncoder(Rng& rng)
      : conv1_(3, 64, 7, 2, 3, rng),
        bn1_(64),
        pool_(3, 2, 1),
        layer1_{BasicBlock<T>(64, 64, 1, rng), BasicBlock<T>(64, 64, 1, rng)},
        layer2_{BasicBlock<T>(64, 128, 2, rng), BasicBlock<T>(128, 128, 1, rng)},
        layer3_{BasicBlock<T>(128, 256, 2, rng), BasicBlock<T>(256, 256, 1, rng)},
        up2_(2), up3_(4), up4_(8),
        reduce_(512, 64, 1, 1, 0, rng) {}

  // Returns F (64 x 128 x 128). `train` selects batchnorm statistics and
  // retains caches for backward.
  FeatureMap<T> forward(const Image& masked, bool train) {
    MHR_CHECK_MSG(masked.width == kInputSize && masked.height == kInputSize,
                  "encoder: input must be " << kInputSize << "x" << kInputSize);
    ++forward_count_;
    MatX<T> x(3, static_cast<Eigen::Index>(kInputSize) * kInputSize);
    for (int c = 0; c < 3; ++c)
      for (long i = 0; i < static_cast<long>(kInputSize) * kInputSize; ++i)
        x(c, i) = static_cast<T>(masked.rgb[i * 3 + c]);

    // Stem: 256 -> 128.
    MatX<T> s1 = bn1_.forward(conv1_.forward(x, 256, 256, train), train);
    s1 = s1.cwiseMax(T(0));
    if (train) stem_out_ = s1;

    MatX<T> p = pool_.forward(s1, 128, 128, train);  // 64 x 64^2
    int h = 64, w = 64;
    MatX<T> s2 = layer1_[0].forward(p, h, w, train, h, w);
    s2 = layer1_[1].forward(s2, h, w, train, h, w);  // 64 x 64^2
    MatX<T> s3 = layer2_[0].forward(s2, h, w, train, h, w);
    s3 = layer2_[1].forward(s3, h, w, train, h, w);  // 128 x 32^2
    MatX<T> s4 = layer3_[0].forward(s3, h, w, train, h, w);
    s4 = layer3_[1].forward(s4, h, w, train, h, w);  // 256 x 16^2

    MatX<T> cat(512, static_cast<Eigen::Index>(kFeatureSize) * kFeatureSize);
    cat.topRows(64) = s1;
    cat.middleRows(64, 64) = up2_.forward(s2, 64, 64);
    cat.middleRows(128, 128) = up3_.forward(s3, 32, 32);
    cat.bottomRows(256) = up4_.forward(s4, 16, 16);

    MatX<T> f = reduce_.forward(cat, kFeatureSize, kFeatureSize, train);
    FeatureMap<T> out(kFeatureChannels, kFeatureSize, kFeatureSize);
    for (int c = 0; c < kFeatureChannels; ++c)
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(out.data.data() + c * out.plane(),
                                                      out.plane()) = f.row(c);
    return out;
  }

  void backward(const FeatureMap<T>& grad_f) {
    MatX<T> df(kFeatureChannels, static_cast<Eigen::Index>(kFeatureSize) * kFeatureSize);
    for (int c = 0; c < kFeatureChannels; ++c)
      df.row(c) = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(
          grad_f.data.data() + c * grad_f.plane(), grad_f.plane());

    MatX<T> dcat = reduce_.backward(df);
    MatX<T> ds1 = dcat.topRows(64);
    MatX<T> ds2 = up2_.backward(dcat.middleRows(64, 64), 64, 64);
    MatX<T> ds3 = up3_.backward(dcat.middleRows(128, 128), 32, 32);
    MatX<T> ds4 = up4_.backward(dcat.bottomRows(256), 16, 16);

    ds3 += layer3_[0].backward(layer3_[1].backward(ds4));
    ds2 += layer2_[0].backward(layer2_[1].backward(ds3));
    MatX<T> dp = layer1_[0].backward(layer1_[1].backward(ds2));
    ds1 += pool_.backward(dp);

    ds1 = ds1.cwiseProduct(
        stem_out_.unaryExpr([](T v) { return v > T(0) ? T(1) : T(0); }));
    stem_out_.resize(0, 0);
    conv1_.backward(bn1_.backward(ds1));  // image gradient unused
  }

  void visit_params(const std::string& prefix, ParamList<T>& out) {
    conv1_.visit_params(prefix + ".conv1", out);
    bn1_.visit_params(prefix + ".bn1", out);
    for (int i = 0; i < 2; ++i) layer1_[i].visit_params(prefix + ".layer1." + std::to_string(i), out);
    for (int i = 0; i < 2; ++i) layer2_[i].visit_params(prefix + ".layer2." + std::to_string(i), out);
    for (int i = 0; i < 2; ++i) layer3_[i].visit_params(prefix + ".layer3." + std::to_string(i), out);
    reduce_.visit_params(prefix + ".reduce", out);
  }
  void visit_buffers(const std::string& prefix,
                     std::vector<std::pair<std::string, std::pair<T*, size_t>>>& out) {
    bn1_.visit_buffers(prefix + ".bn1", out);
    for (int i = 0; i < 2; ++i) layer1_[i].visit_buffers(prefix + ".layer1." + std::to_string(i), out);
    for (int i = 0; i < 2; ++i) layer2_[i].visit_buffers(prefix + ".layer2." + std::to_string(i), out);
    for (int i = 0; i < 2; ++i) layer3_[i].visit_buffers(prefix + ".layer3." + std::to_string(i), out);
  }

  Conv2d<T>& reduce_conv() { return reduce_; }
  long forward_count() const { return forward_count_; }

 private:
  Conv2d<T> conv1_;
  BatchNorm2d<T> bn1_;
  MaxPool2d<T> pool_;
  std::array<BasicBlock<T>, 2> layer1_, layer2_, layer3_;
  UpsampleBilinear<T> up2_{2}, up3_{4}, up4_{8};
  Conv2d<T> reduce_;
  MatX<T> stem_out_;
  long forward_count_ = 0;
};

}  // namespace mhr
