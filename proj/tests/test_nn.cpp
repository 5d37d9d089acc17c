// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#include <mhr/nn/batchnorm.hpp>
#include <mhr/nn/conv2d.hpp>
#include <mhr/nn/mlp.hpp>
#include <mhr/nn/resnet.hpp>

#include <gtest/gtest.h>

#include "support/test_utils.hpp"

using namespace mhr;

namespace {

// Scalar loss used by the gradient checks: weighted sum of outputs, with
// fixed pseudo-random weights so every output contributes.
MatX<double> loss_weights(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  Rng rng(seed);
  MatX<double> w(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = rng.uniform(-1, 1);
  return w;
}

TEST(Linear, GradCheck) {
  Rng rng(1);
  Linear<double> layer(7, 5, rng);
  MatX<double> x(3, 7);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  MatX<double> lw = loss_weights(3, 5, 99);

  auto loss = [&](const MatX<double>& input) {
    Linear<double> copy = layer;
    return copy.forward(input, false).cwiseProduct(lw).sum();
  };

  layer.forward(x, true);
  MatX<double> dx = layer.backward(lw);

  const double h = 1e-6;
  for (int i = 0; i < x.size(); ++i) {
    MatX<double> xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    double numeric = (loss(xp) - loss(xm)) / (2 * h);
    EXPECT_LT(test::rel_error(dx.data()[i], numeric), 1e-6);
  }

  // weight grads
  ParamList<double> params;
  layer.visit_params("lin", params);
  zero_grads(params);
  layer.forward(x, true);
  layer.backward(lw);
  for (const auto& p : params) {
    for (size_t i = 0; i < p.size; i += 3) {
      double orig = p.value[i];
      p.value[i] = orig + h;
      double lp = loss(x);
      p.value[i] = orig - h;
      double lm = loss(x);
      p.value[i] = orig;
      EXPECT_LT(test::rel_error(p.grad[i], (lp - lm) / (2 * h)), 1e-5);
    }
  }
}

TEST(Mlp, SoftplusOutputGradCheck) {
  Rng rng(2);
  Mlp<double> mlp({6, 8, 1}, OutputActivation::kSoftplus, rng);
  MatX<double> x(4, 6);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  MatX<double> lw = loss_weights(4, 1, 5);

  auto loss = [&](const MatX<double>& input) {
    Mlp<double> copy = mlp;
    return copy.forward(input, false).cwiseProduct(lw).sum();
  };
  mlp.forward(x, true);
  MatX<double> dx = mlp.backward(lw);
  const double h = 1e-6;
  for (int i = 0; i < x.size(); ++i) {
    MatX<double> xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    EXPECT_LT(test::rel_error(dx.data()[i], (loss(xp) - loss(xm)) / (2 * h)), 1e-5);
  }
}

TEST(BatchNorm2d, TrainGradCheck) {
  Rng rng(3);
  BatchNorm2d<double> bn(3);
  // non-trivial gamma/beta
  ParamList<double> params;
  bn.visit_params("bn", params);
  for (const auto& p : params)
    for (size_t i = 0; i < p.size; ++i) p.value[i] += rng.uniform(-0.3, 0.3);

  MatX<double> x(3, 9);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  MatX<double> lw = loss_weights(3, 9, 6);

  auto loss = [&](const MatX<double>& input) {
    BatchNorm2d<double> copy = bn;
    return copy.forward(input, true).cwiseProduct(lw).sum();
  };
  bn.forward(x, true);
  MatX<double> dx = bn.backward(lw);
  const double h = 1e-6;
  for (int i = 0; i < x.size(); ++i) {
    MatX<double> xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    EXPECT_LT(test::rel_error(dx.data()[i], (loss(xp) - loss(xm)) / (2 * h)), 1e-5);
  }
}

TEST(BatchNorm2d, EvalUsesRunningStats) {
  Rng rng(4);
  BatchNorm2d<double> bn(2);
  MatX<double> x(2, 50);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal(1.5, 2.0);
  for (int step = 0; step < 200; ++step) bn.forward(x, true);
  MatX<double> y = bn.forward(x, false);
  // after convergence of the running stats, eval output is near-normalized
  EXPECT_NEAR(y.row(0).mean(), 0.0, 0.05);
  double var = (y.row(0).array() - y.row(0).mean()).square().mean();
  EXPECT_NEAR(var, 1.0, 0.1);
}

// Direct convolution oracle.
MatX<double> conv2d_naive(const MatX<double>& x, int h, int w, const MatX<double>& weight,
                          const VecX<double>& bias, int out_c, int k, int stride, int pad) {
  int in_c = static_cast<int>(x.rows());
  int oh = (h + 2 * pad - k) / stride + 1;
  int ow = (w + 2 * pad - k) / stride + 1;
  MatX<double> y(out_c, oh * ow);
  for (int oc = 0; oc < out_c; ++oc)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double acc = bias[oc];
        for (int ic = 0; ic < in_c; ++ic)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              int iy = oy * stride - pad + ky;
              int ix = ox * stride - pad + kx;
              if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
              acc += weight(oc, (ic * k + ky) * k + kx) * x(ic, iy * w + ix);
            }
        y(oc, oy * ow + ox) = acc;
      }
  return y;
}

TEST(Conv2d, MatchesNaiveOracle) {
  Rng rng(5);
  Conv2d<double> conv(3, 4, 3, 2, 1, rng);
  MatX<double> x(3, 7 * 9);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  MatX<double> got = conv.forward(x, 7, 9, false);
  MatX<double> want = conv2d_naive(x, 7, 9, conv.weight(), conv.bias(), 4, 3, 2, 1);
  EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Conv2d, GradCheck) {
  Rng rng(6);
  Conv2d<double> conv(2, 3, 3, 1, 1, rng);
  MatX<double> x(2, 5 * 6);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  MatX<double> lw = loss_weights(3, 5 * 6, 7);

  auto loss = [&](const MatX<double>& input) {
    Conv2d<double> copy = conv;
    return copy.forward(input, 5, 6, false).cwiseProduct(lw).sum();
  };
  conv.forward(x, 5, 6, true);
  MatX<double> dx = conv.backward(lw);
  const double h = 1e-6;
  for (int i = 0; i < x.size(); i += 2) {
    MatX<double> xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    EXPECT_LT(test::rel_error(dx.data()[i], (loss(xp) - loss(xm)) / (2 * h)), 1e-5);
  }

  ParamList<double> params;
  conv.visit_params("conv", params);
  zero_grads(params);
  conv.forward(x, 5, 6, true);
  conv.backward(lw);
  auto param_loss = [&]() {
    Conv2d<double> copy = conv;
    return copy.forward(x, 5, 6, false).cwiseProduct(lw).sum();
  };
  for (const auto& p : params) {
    for (size_t i = 0; i < p.size; i += 5) {
      double orig = p.value[i];
      p.value[i] = orig + h;
      double lp = param_loss();
      p.value[i] = orig - h;
      double lm = param_loss();
      p.value[i] = orig;
      EXPECT_LT(test::rel_error(p.grad[i], (lp - lm) / (2 * h)), 1e-5);
    }
  }
}

TEST(MaxPool, ForwardBackward) {
  Rng rng(8);
  MaxPool2d<double> pool(3, 2, 1);
  MatX<double> x(1, 6 * 6);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  MatX<double> y = pool.forward(x, 6, 6, true);
  EXPECT_EQ(y.cols(), 9);
  // backward routes each output grad to its argmax input
  MatX<double> dy = MatX<double>::Ones(1, 9);
  MatX<double> dx = pool.backward(dy);
  EXPECT_DOUBLE_EQ(dx.sum(), 9.0);
}

TEST(Upsample, BackwardIsTranspose) {
  Rng rng(9);
  UpsampleBilinear<double> up(2);
  MatX<double> x(2, 4 * 4);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  MatX<double> dy(2, 8 * 8);
  for (int i = 0; i < dy.size(); ++i) dy.data()[i] = rng.normal();
  // <dy, up(x)> == <up^T(dy), x>
  double lhs = up.forward(x, 4, 4).cwiseProduct(dy).sum();
  double rhs = up.backward(dy, 4, 4).cwiseProduct(x).sum();
  EXPECT_NEAR(lhs, rhs, 1e-10);
}

TEST(Encoder, OutputShapeContract) {
  Rng rng(10);
  ResnetEncoder<float> enc(rng);
  Image img(256, 256);
  for (auto& v : img.rgb) v = static_cast<float>(rng.uniform());
  FeatureMap<float> f = enc.forward(img, false);
  EXPECT_EQ(f.channels, 64);
  EXPECT_EQ(f.height, 128);
  EXPECT_EQ(f.width, 128);
}

TEST(Encoder, ZeroImageFiniteOutput) {
  Rng rng(11);
  ResnetEncoder<float> enc(rng);
  Image img(256, 256);  // all zeros; reduce bias is zero-initialized
  FeatureMap<float> f = enc.forward(img, false);
  for (float v : f.data) ASSERT_TRUE(std::isfinite(v));
}

TEST(Encoder, DeterministicEval) {
  Rng rng(12);
  ResnetEncoder<float> enc(rng);
  Image img(256, 256);
  for (auto& v : img.rgb) v = static_cast<float>(rng.uniform());
  FeatureMap<float> a = enc.forward(img, false);
  FeatureMap<float> b = enc.forward(img, false);
  EXPECT_EQ(a.data, b.data);
}

TEST(Encoder, ReceptiveFieldProbe) {
  Rng rng(13);
  ResnetEncoder<float> enc(rng);
  Image img(256, 256);
  for (auto& v : img.rgb) v = static_cast<float>(rng.uniform());
  FeatureMap<float> base = enc.forward(img, false);

  Image poked = img;
  poked.pixel(20, 20)[1] += 0.5f;
  FeatureMap<float> changed = enc.forward(poked, false);

  // Stem+3 stages: theoretical receptive field 211 px; use a safety margin.
  const double rf_radius_img = 115.0;
  const double probe_u = 20, probe_v = 20;
  bool near_changed = false;
  for (int c = 0; c < base.channels; ++c)
    for (int y = 0; y < base.height; ++y)
      for (int x = 0; x < base.width; ++x) {
        double du = 2.0 * x - probe_u, dv = 2.0 * y - probe_v;
        bool outside = std::abs(du) > rf_radius_img + 8 || std::abs(dv) > rf_radius_img + 8;
        float delta = std::abs(changed.at(c, y, x) - base.at(c, y, x));
        if (outside) {
          ASSERT_EQ(delta, 0.0f) << "feature leaked outside receptive field";
        } else if (delta > 0) {
          near_changed = true;
        }
      }
  EXPECT_TRUE(near_changed);
}

TEST(Encoder, ReduceConvGradCheck) {
  // 64-bit finite differences on the final 1x1 reduction layer.
  Rng rng(14);
  Conv2d<double> reduce(8, 4, 1, 1, 0, rng);
  MatX<double> x(8, 5 * 5);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  MatX<double> lw = loss_weights(4, 25, 21);

  auto loss = [&]() {
    Conv2d<double> copy = reduce;
    return copy.forward(x, 5, 5, false).cwiseProduct(lw).sum();
  };
  ParamList<double> params;
  reduce.visit_params("reduce", params);
  zero_grads(params);
  reduce.forward(x, 5, 5, true);
  MatX<double> dx = reduce.backward(lw);

  const double h = 1e-6;
  double worst = 0;
  for (const auto& p : params)
    for (size_t i = 0; i < p.size; ++i) {
      double orig = p.value[i];
      p.value[i] = orig + h;
      double lp = loss();
      p.value[i] = orig - h;
      double lm = loss();
      p.value[i] = orig;
      worst = std::max(worst, test::rel_error(p.grad[i], (lp - lm) / (2 * h)));
    }
  EXPECT_LT(worst, 1e-4);

  auto input_loss = [&](const MatX<double>& input) {
    Conv2d<double> copy = reduce;
    return copy.forward(input, 5, 5, false).cwiseProduct(lw).sum();
  };
  for (int i = 0; i < x.size(); i += 7) {
    MatX<double> xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    EXPECT_LT(test::rel_error(dx.data()[i], (input_loss(xp) - input_loss(xm)) / (2 * h)),
              1e-4);
  }
}

}  // namespace
