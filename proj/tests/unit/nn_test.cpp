#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "s2p/error.hpp"
#include "s2p/model/s2p_model.hpp"
#include "s2p/nn/adam.hpp"
#include "s2p/nn/gradient_check.hpp"
#include "s2p/nn/loss.hpp"
#include "s2p/nn/serialize.hpp"
#include "test_util.hpp"

namespace s2p::nn {
namespace {

using test::random_tensor;

Conv2dConfig conv_cfg(std::size_t cin, std::size_t cout, std::size_t kh, std::size_t kw) {
  Conv2dConfig c;
  c.in_channels = cin;
  c.out_channels = cout;
  c.kernel_h = kh;
  c.kernel_w = kw;
  return c;
}

/// Straightforward nested-loop cross-correlation with zero padding.
Tensor reference_conv(const Tensor& x, const Tensor& w, const Tensor* bias, std::size_t sh, std::size_t sw,
                      Padding pad) {
  const std::size_t n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const std::size_t ho = (h + pad.top + pad.bottom - kh) / sh + 1;
  const std::size_t wo = (wd + pad.left + pad.right - kw) / sw + 1;
  Tensor y({n, co, ho, wo});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t o = 0; o < co; ++o)
      for (std::size_t i = 0; i < ho; ++i)
        for (std::size_t j = 0; j < wo; ++j) {
          double s = bias ? (*bias)[o] : 0.0;
          for (std::size_t c = 0; c < ci; ++c)
            for (std::size_t p = 0; p < kh; ++p)
              for (std::size_t q = 0; q < kw; ++q) {
                const long r = static_cast<long>(i * sh + p) - static_cast<long>(pad.top);
                const long col = static_cast<long>(j * sw + q) - static_cast<long>(pad.left);
                if (r < 0 || col < 0 || r >= static_cast<long>(h) || col >= static_cast<long>(wd)) continue;
                s += w[((o * ci + c) * kh + p) * kw + q] * x[((b * ci + c) * h + r) * wd + col];
              }
          y[((b * co + o) * ho + i) * wo + j] = s;
        }
  return y;
}

TEST(Tensor, RejectsDataOfWrongLength) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  const Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.reshaped({3, 2}).shape(), (Shape{3, 2}));
  EXPECT_THROW(t.reshaped({4, 2}), ShapeError);
}

TEST(Relu, ForwardAndBackward) {
  const Relu relu("r");
  const ForwardResult f = relu.forward(Tensor({3}, {-1.0, 0.0, 2.0}), Mode::train);
  EXPECT_EQ(f.output.values(), (std::vector<double>{0.0, 0.0, 2.0}));

  const ForwardResult g = relu.forward(Tensor({2}, {-1.0, 2.0}), Mode::train);
  const BackwardResult b = relu.backward(g.cache, Tensor({2}, {5.0, 7.0}));
  EXPECT_EQ(b.input_grad.values(), (std::vector<double>{0.0, 7.0}));
}

TEST(Conv2d, IdentityKernelReproducesInput) {
  Conv2d conv("c", conv_cfg(1, 1, 1, 1));
  conv.weight().fill(1.0);
  conv.parameters()[1].value.fill(0.0);
  const Tensor x = random_tensor({2, 1, 3, 5}, 1);
  EXPECT_EQ(conv.forward(x, Mode::infer).output, x);
}

TEST(Conv2d, HandComputedRow) {
  Conv2d conv("c", conv_cfg(1, 1, 1, 3));
  conv.weight().fill(1.0);
  conv.parameters()[1].value.fill(0.0);
  const Tensor y = conv.forward(Tensor({1, 1, 1, 4}, {1, 2, 3, 4}), Mode::infer).output;
  EXPECT_EQ(y.shape(), (Shape{1, 1, 1, 2}));
  EXPECT_EQ(y.values(), (std::vector<double>{6.0, 9.0}));
}

TEST(Conv2d, MatchesNestedLoopReference) {
  for (const auto& [stride, pad] : {std::pair<std::size_t, Padding>{1, {0, 0, 0, 0}}, {2, {1, 0, 2, 1}},
                                    {3, {0, 1, 4, 5}}}) {
    Conv2dConfig c = conv_cfg(2, 4, 2, 5);
    c.stride_w = stride;
    c.padding = pad;
    Conv2d conv("c", c);
    std::mt19937_64 rng(9);
    conv.initialize(rng);
    for (double& v : conv.parameters()[1].value.data()) v = uniform01(rng);
    const Tensor x = random_tensor({3, 2, 2, 17}, 4);
    const Tensor got = conv.forward(x, Mode::infer).output;
    const Tensor want = reference_conv(x, conv.weight(), &conv.parameters()[1].value, 1, stride, pad);
    ASSERT_EQ(got.shape(), want.shape());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
  }
}

TEST(Conv2d, WeightShapeAndShapeErrors) {
  const Conv2d conv("c", conv_cfg(2, 3, 2, 4));
  EXPECT_EQ(conv.weight().shape(), (Shape{3, 2, 2, 4}));
  EXPECT_THROW(conv.forward(Tensor({1, 1, 2, 8}), Mode::infer), ShapeError);
  EXPECT_THROW(conv.forward(Tensor({1, 2, 2, 3}), Mode::infer), ShapeError);
}

TEST(Layers, NonFiniteInputIsANumericError) {
  Tensor x({1, 3}, 0.0);
  x[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Relu("r").forward(x, Mode::infer), NumericError);
  EXPECT_THROW(Dense("d", 3, 1).forward(x, Mode::infer), NumericError);
}

TEST(Layers, BackwardRejectsForeignCache) {
  const Relu a("a"), b("b");
  const ForwardResult f = a.forward(Tensor({2}, {1.0, -1.0}), Mode::train);
  EXPECT_THROW(b.backward(f.cache, Tensor({2}, {1.0, 1.0})), ContractError);
  EXPECT_THROW(a.backward(f.cache, Tensor({3}, {1.0, 1.0, 1.0})), ShapeError);
}

TEST(Dense, ScalarChainRule) {
  Dense fc("fc", 1, 1);
  fc.weight()[0] = 3.0;
  fc.parameters()[1].value[0] = 0.0;
  const ForwardResult f = fc.forward(Tensor({1, 1}, {2.0}), Mode::train);
  EXPECT_EQ(f.output[0], 6.0);
  const BackwardResult b = fc.backward(f.cache, Tensor({1, 1}, {1.0}));
  EXPECT_EQ(b.param_grads[0].values(), (std::vector<double>{2.0}));
  EXPECT_EQ(b.input_grad.values(), (std::vector<double>{3.0}));
}

TEST(Loss, Examples) {
  const Tensor a = random_tensor({4, 1}, 3);
  const LossResult same = mse_loss(a, a);
  EXPECT_EQ(same.loss, 0.0);
  for (double g : same.grad.data()) EXPECT_EQ(g, 0.0);

  EXPECT_EQ(mse_loss(Tensor({2}, {1.0, 0.0}), Tensor({2}, {0.0, 0.0})).loss, 0.5);
  EXPECT_THROW(mse_loss(Tensor({2}), Tensor({3})), ShapeError);
}

TEST(Loss, MatchesSummationLoop) {
  const Tensor p = random_tensor({100}, 11), t = random_tensor({100}, 12);
  double s = 0.0;
  for (std::size_t i = 0; i < 100; ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
  const LossResult r = mse_loss(p, t);
  EXPECT_NEAR(r.loss, s / 100.0, 1e-12);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_NEAR(r.grad[i], 2.0 * (p[i] - t[i]) / 100.0, 1e-15);
}

TEST(Adam, ZeroGradientLeavesParameterUnchanged) {
  Parameter p{"w", Tensor({3}, {0.25, -1.0, 2.0})};
  std::vector<Parameter*> params{&p};
  AdamState st = AdamState::for_parameters(params);
  const std::vector<Tensor> grads{Tensor({3}, 0.0)};
  adam_step(params, grads, st, 0.005);
  EXPECT_EQ(p.value.values(), (std::vector<double>{0.25, -1.0, 2.0}));
  EXPECT_EQ(st.step, 1u);
}

TEST(Adam, FirstBiasCorrectedStep) {
  Parameter p{"w", Tensor({1}, {1.0})};
  std::vector<Parameter*> params{&p};
  AdamState st = AdamState::for_parameters(params);
  adam_step(params, std::vector<Tensor>{Tensor({1}, {0.5})}, st, 0.005);
  // m_hat = 0.5, v_hat = 0.25 after bias correction.
  EXPECT_NEAR(p.value[0], 1.0 - 0.005 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(p.value[0], 0.995, 1e-9);
  EXPECT_GE(st.second_moment[0][0], 0.0);
}

TEST(Adam, FrozenParameterAndMomentsUntouched) {
  Parameter live{"a", Tensor({2}, {1.0, 2.0})};
  Parameter frozen{"b", Tensor({2}, {3.0, 4.0}), false};
  std::vector<Parameter*> params{&live, &frozen};
  AdamState st = AdamState::for_parameters(params);
  const std::vector<Tensor> grads{Tensor({2}, {0.3, -0.2}), Tensor({2}, {5.0, -7.0})};
  for (int i = 0; i < 3; ++i) adam_step(params, grads, st, 0.01);
  EXPECT_EQ(frozen.value.values(), (std::vector<double>{3.0, 4.0}));
  EXPECT_EQ(st.first_moment[1].values(), (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(st.second_moment[1].values(), (std::vector<double>{0.0, 0.0}));
  EXPECT_NE(live.value[0], 1.0);
  EXPECT_EQ(st.step, 3u);
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  Parameter p{"conv3.weight", Tensor({1}, {1.0})};
  std::vector<Parameter*> params{&p};
  AdamState st = AdamState::for_parameters(params);
  try {
    adam_step(params, std::vector<Tensor>{Tensor({1}, {std::numeric_limits<double>::infinity()})}, st, 0.1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("conv3.weight"), std::string::npos);
  }
}

TEST(Freezing, FirstConvAndLastDenseSelection) {
  model::S2PModel m = model::S2PModel::build(model::ArchConfig{}, 1);
  model::set_trainable(m.net, model::all_layers(), false);
  EXPECT_TRUE(model::trainable_parameter_names(m.net).empty());
  model::set_trainable(m.net, model::any_of({model::first_conv_block(false), model::last_dense()}), true);
  EXPECT_EQ(model::trainable_parameter_names(m.net),
            (std::vector<std::string>{"conv1.weight", "fc_out.weight", "fc_out.bias"}));

  model::set_trainable(m.net, model::all_layers(), true);
  for (const Parameter* p : m.net.parameters()) EXPECT_TRUE(p->trainable);

  const model::LayerSelector nothing = [](const Layer&, std::size_t) { return false; };
  EXPECT_THROW(model::set_trainable(m.net, nothing, false), ContractError);
}

TEST(GradientCheck, Dense) {
  Dense fc("fc", 6, 4);
  std::mt19937_64 rng(2);
  fc.initialize(rng);
  for (double& v : fc.parameters()[1].value.data()) v = uniform01(rng);
  EXPECT_LT(gradient_check(fc, random_tensor({5, 6}, 3), 1e-5).max_relative_error, 1e-5);
}

TEST(GradientCheck, TwoChannelConv) {
  Conv2dConfig c = conv_cfg(2, 3, 2, 4);
  c.padding = {0, 0, 1, 2};
  c.bias = false;
  Conv2d conv("c", c);
  std::mt19937_64 rng(5);
  conv.initialize(rng);
  const GradCheckReport r = gradient_check(conv, random_tensor({2, 2, 2, 11}, 6), 1e-5);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_coordinate;
  EXPECT_EQ(r.coordinates_checked, 3u * 2 * 2 * 4 + 2 * 2 * 2 * 11);
}

TEST(GradientCheck, ReluAwayFromKink) {
  Tensor x = random_tensor({3, 8}, 8);
  for (double& v : x.data()) v += v >= 0.0 ? 0.1 : -0.1;
  EXPECT_LT(gradient_check(Relu("r"), x, 1e-5).max_relative_error, 1e-6);
}

TEST(GradientCheck, BatchNormTrainAndInfer) {
  BatchNorm bn("bn", 4);
  for (double& v : bn.parameters()[0].value.data()) v = 1.3;
  EXPECT_LT(gradient_check(bn, random_tensor({5, 4, 1, 6}, 9), 1e-5).max_relative_error, 1e-4);
  GradCheckOptions infer;
  infer.mode = Mode::infer;
  EXPECT_LT(gradient_check(bn, random_tensor({5, 4}, 10), 1e-5, infer).max_relative_error, 1e-4);
}

TEST(GradientCheck, DropoutWithFixedMask) {
  EXPECT_LT(gradient_check(Dropout("d", 0.4), random_tensor({4, 10}, 12), 1e-5).max_relative_error, 1e-4);
}

TEST(GradientCheck, SmallNetwork) {
  model::ArchConfig a;
  a.filters = {3, 3, 4, 4, 4};
  a.fc_widths = {8};
  const model::S2PModel m = model::S2PModel::build(a, 3);
  GradCheckOptions opts;
  opts.max_coords_per_tensor = 30;
  const GradCheckReport r =
      gradient_check(m.net, random_tensor({6, 1, 2, 33}, 13, 0.0, 1.0), random_tensor({6, 1}, 14, 0.0, 1.0), 1e-5, opts);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_coordinate;
  EXPECT_GT(r.coordinates_checked, 50u);
}

TEST(Dropout, DeterministicPerSeedAndUnbiased) {
  const Dropout d("d", 0.4);
  const Tensor x = random_tensor({1, 50}, 15, 0.5, 1.5);
  EXPECT_EQ(d.forward(x, Mode::train, 42).output, d.forward(x, Mode::train, 42).output);
  EXPECT_NE(d.forward(x, Mode::train, 42).output, d.forward(x, Mode::train, 43).output);
  EXPECT_EQ(d.forward(x, Mode::infer).output, x);
  EXPECT_THROW(d.forward(x, Mode::train), ContractError);

  std::vector<double> sum(x.size(), 0.0);
  constexpr int kSeeds = 10000;
  for (int s = 0; s < kSeeds; ++s) {
    const Tensor y = d.forward(x, Mode::train, static_cast<std::uint64_t>(s)).output;
    for (std::size_t i = 0; i < y.size(); ++i) sum[i] += y[i];
  }
  double in = 0.0, out = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    in += x[i];
    out += sum[i] / kSeeds;
  }
  EXPECT_NEAR(out / in, 1.0, 0.02);
  EXPECT_THROW(Dropout("bad", 1.0), ConfigError);
}

TEST(BatchNorm, InferModeIsAffinePerChannel) {
  BatchNorm bn("bn", 3);
  for (double& v : bn.parameters()[0].value.data()) v = 0.7;
  for (double& v : bn.parameters()[1].value.data()) v = -0.2;
  // Give it non-trivial running statistics.
  const ForwardResult f = bn.forward(random_tensor({8, 3, 1, 5}, 16, 0.0, 4.0), Mode::train);
  bn.update_statistics(f.cache);
  for (double v : bn.running_var().data()) EXPECT_GE(v, 0.0);

  const Tensor a = random_tensor({2, 3, 1, 5}, 17), b = random_tensor({2, 3, 1, 5}, 18);
  Tensor mid(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
  const Tensor fa = bn.forward(a, Mode::infer).output, fb = bn.forward(b, Mode::infer).output;
  const Tensor fm = bn.forward(mid, Mode::infer).output;
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(fm[i], 0.5 * (fa[i] + fb[i]), 1e-12);
}

TEST(Sequential, InferForwardIsPure) {
  const model::S2PModel m = model::S2PModel::build(model::ArchConfig{}, 4);
  const model::S2PModel before = m;
  const Tensor x = random_tensor({3, 1, 2, 33}, 19, 0.0, 1.0);
  const Tensor y1 = m.net.forward(x, {});
  const Tensor y2 = m.net.forward(x, {});
  EXPECT_EQ(y1, y2);
  for (std::size_t i = 0; i < m.net.size(); ++i) {
    for (std::size_t p = 0; p < m.net.layer(i).parameters().size(); ++p) {
      EXPECT_EQ(m.net.layer(i).parameters()[p].value, before.net.layer(i).parameters()[p].value);
    }
  }
}

TEST(Sequential, ShapeErrorNamesLayer) {
  const model::S2PModel m = model::S2PModel::build(model::ArchConfig{}, 4);
  try {
    m.net.output_shape({1, 1, 2, 31});
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("fc1"), std::string::npos) << e.what();
  }
}

TEST(Serialize, RoundTripAndTruncation) {
  ByteWriter w;
  w.u8(7);
  w.u32(0xDEADBEEF);
  w.u64(1ull << 40);
  w.f64(-0.1);
  w.str("conv1.weight");
  const Tensor t = random_tensor({2, 3}, 20);
  w.tensor(t);
  ByteReader r(w.bytes().data(), w.bytes().size());
  EXPECT_EQ(r.u8(), 7);
  EXPECT_EQ(r.u32(), 0xDEADBEEFu);
  EXPECT_EQ(r.u64(), 1ull << 40);
  EXPECT_EQ(r.f64(), -0.1);
  EXPECT_EQ(r.str(), "conv1.weight");
  EXPECT_EQ(r.tensor(), t);
  EXPECT_EQ(r.remaining(), 0u);
  EXPECT_THROW(r.u8(), FormatError);
}

}  // namespace
}  // namespace s2p::nn
