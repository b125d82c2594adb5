#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "irspla/nn/checkpoint.hpp"
#include "irspla/nn/gemm.hpp"
#include "irspla/nn/ops.hpp"
#include "irspla/nn/optim.hpp"
#include "irspla/nn/params.hpp"

using namespace irspla;
using namespace irspla::nn;

namespace {

std::vector<double> naive_matmul(const std::vector<double>& a, const std::vector<double>& b, std::size_t m,
                                 std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) c[i * n + j] += a[i * k + p] * b[p * n + j];
  return c;
}

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Relu, ClampsNegatives) {
  auto y = relu(Tensor::constant({3}, {-1, 0, 2}));
  EXPECT_EQ(y.values(), (std::vector<double>{0, 0, 2}));
}

TEST(Softmax, EqualLogitsSplitEvenly) {
  auto y = softmax(Tensor::constant({1, 2}, {0, 0}));
  EXPECT_DOUBLE_EQ(y.values()[0], 0.5);
  EXPECT_DOUBLE_EQ(y.values()[1], 0.5);
}

TEST(Softmax, RowsSumToOneEvenForLargeLogits) {
  auto y = softmax(Tensor::constant({2, 3}, {1000, 999, -1000, 3, 2, 1}));
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(y.at(i, 0) + y.at(i, 1) + y.at(i, 2), 1.0, 1e-12);
  EXPECT_NEAR(y.at(0, 0), 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(Softmax, ColumnAxis) {
  auto y = softmax(Tensor::constant({2, 2}, {0, 5, 0, 5}), 0);
  for (double v : y.values()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Matmul, ShapeOfProduct) {
  auto c = matmul(Tensor::zeros({2, 3}), Tensor::zeros({3, 4}));
  EXPECT_EQ(c.shape(), (Shape{2, 4}));
}

TEST(Matmul, InnerDimensionMismatchIsShapeError) {
  EXPECT_THROW(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), ShapeError);
}

TEST(Gemm, MatchesNaiveProductForOddSizes) {
  for (auto [m, k, n] : {std::tuple{1u, 1u, 1u}, {4u, 7u, 12u}, {13u, 5u, 29u}, {33u, 64u, 50u}, {3u, 2u, 11u}}) {
    const auto a = random_values(m * k, m + 10 * k);
    const auto b = random_values(k * n, n + 7);
    std::vector<double> c(m * n, 0.0);
    kernels::gemm(m, n, k, a.data(), k, b.data(), n, c.data(), n);
    const auto ref = naive_matmul(a, b, m, k, n);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-12) << m << "x" << k << "x" << n;
  }
}

TEST(Gemm, AccumulatesIntoOutput) {
  std::vector<double> a{1, 2}, b{3, 4}, c{10};
  kernels::gemm(1, 1, 2, a.data(), 2, b.data(), 1, c.data(), 1);
  EXPECT_DOUBLE_EQ(c[0], 21.0);
}

TEST(CausalConv, PairSumKernel) {
  auto y = causal_conv1d(Tensor::constant({1, 4}, {1, 2, 3, 4}), Tensor::constant({1, 1, 2}, {1, 1}),
                         Tensor::zeros({1}), 1);
  EXPECT_EQ(y.values(), (std::vector<double>{1, 3, 5, 7}));
}

TEST(CausalConv, UnitKernelIsIdentity) {
  const std::vector<double> x{0.5, -2, 3, 9, 1};
  auto y = causal_conv1d(Tensor::constant({1, 5}, x), Tensor::constant({1, 1, 1}, {1}), Tensor::zeros({1}), 1);
  EXPECT_EQ(y.values(), x);
}

TEST(CausalConv, DilationSkipsSamples) {
  // tap 0 multiplies x[t-2], tap 1 multiplies x[t]
  auto y = causal_conv1d(Tensor::constant({1, 5}, {1, 2, 3, 4, 5}), Tensor::constant({1, 1, 2}, {10, 1}),
                         Tensor::constant({1}, {0.5}), 2);
  EXPECT_EQ(y.values(), (std::vector<double>{1.5, 2.5, 13.5, 24.5, 35.5}));
}

TEST(CausalConv, MatchesDirectSumOverChannels) {
  const std::size_t cin = 3, cout = 4, k = 3, len = 11, dil = 2, nb = 2;
  const auto x = random_values(nb * cin * len, 1), w = random_values(cout * cin * k, 2), b = random_values(cout, 3);
  auto y = causal_conv1d(Tensor::constant({nb, cin, len}, x), Tensor::constant({cout, cin, k}, w),
                         Tensor::constant({cout}, b), dil);
  for (std::size_t n = 0; n < nb; ++n)
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t t = 0; t < len; ++t) {
        double ref = b[o];
        for (std::size_t c = 0; c < cin; ++c)
          for (std::size_t j = 0; j < k; ++j) {
            const long src = static_cast<long>(t) - static_cast<long>((k - 1 - j) * dil);
            if (src >= 0) ref += w[(o * cin + c) * k + j] * x[(n * cin + c) * len + static_cast<std::size_t>(src)];
          }
        EXPECT_NEAR(y.values()[(n * cout + o) * len + t], ref, 1e-12);
      }
}

TEST(CausalConv, OutputDoesNotSeeTheFuture) {
  auto w = Tensor::constant({2, 1, 3}, random_values(6, 4));
  auto b = Tensor::zeros({2});
  auto x1 = random_values(8, 5), x2 = x1;
  for (std::size_t t = 5; t < 8; ++t) x2[t] += 100.0;
  auto y1 = causal_conv1d(Tensor::constant({1, 8}, x1), w, b, 2);
  auto y2 = causal_conv1d(Tensor::constant({1, 8}, x2), w, b, 2);
  for (std::size_t o = 0; o < 2; ++o)
    for (std::size_t t = 0; t < 5; ++t) EXPECT_EQ(y1.at(o, t), y2.at(o, t));
  EXPECT_NE(y1.at(0, 7), y2.at(0, 7));
}

TEST(CausalConv, ChannelMismatchIsShapeError) {
  EXPECT_THROW(causal_conv1d(Tensor::zeros({2, 5}), Tensor::zeros({1, 1, 2}), Tensor::zeros({1}), 1), ShapeError);
}

TEST(Backward, SquareHasSlopeTwoX) {
  auto x = Tensor::scalar(3.0, true);
  backward(mul(x, x));
  EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
}

TEST(Backward, SoftmaxCrossEntropyGivesProbMinusTarget) {
  auto z = Tensor::parameter({1, 3}, {0.2, -1.0, 2.5});
  auto p = softmax(z);
  backward(cross_entropy(p, Tensor::constant({1, 3}, {0, 1, 0})));
  const std::vector<double> y{0, 1, 0};
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(z.grad()[i], p.values()[i] - y[i], 1e-12);
}

TEST(Backward, NonScalarLossIsContractError) {
  auto x = Tensor::parameter({2}, {1, 2});
  EXPECT_THROW(backward(scale(x, 2.0)), ContractError);
}

TEST(Backward, LeafGradientsAccumulateAcrossCalls) {
  auto x = Tensor::scalar(2.0, true);
  backward(scale(x, 3.0));
  backward(scale(x, 3.0));
  EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
  x.zero_grad();
  EXPECT_DOUBLE_EQ(x.grad()[0], 0.0);
}

TEST(Backward, SharedSubexpressionCountedOnce) {
  auto x = Tensor::scalar(1.5, true);
  auto y = mul(x, x);
  backward(add(y, y));  // d/dx 2x^2 = 4x
  EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
}

TEST(Backward, ConstantsGetNoRecord) {
  auto y = mul(Tensor::scalar(2.0), Tensor::scalar(3.0));
  EXPECT_FALSE(y.requires_grad());
  EXPECT_TRUE(y.node()->inputs.empty());
}

TEST(CrossEntropy, ClampsZeroProbability) {
  auto loss = cross_entropy(Tensor::constant({1, 2}, {0.0, 1.0}), Tensor::constant({1, 2}, {1, 0}));
  EXPECT_NEAR(loss.item(), -std::log(1e-12), 1e-9);
}

TEST(RowNormalize, ZeroRowStaysZero) {
  auto y = row_normalize(Tensor::constant({2, 2}, {0, 0, 1, 3}));
  EXPECT_EQ(y.values(), (std::vector<double>{0, 0, 0.25, 0.75}));
}

TEST(Concat, BothAxes) {
  auto a = Tensor::constant({1, 2}, {1, 2}), b = Tensor::constant({1, 1}, {3});
  EXPECT_EQ(concat({a, b}, 1).values(), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(concat({a, a}, 0).shape(), (Shape{2, 2}));
  EXPECT_THROW(concat({a, b}, 0), ShapeError);
}

TEST(AdamW, ZeroGradientWithoutDecayLeavesParameters) {
  std::vector<double> p{1.0, -2.0, 0.25};
  const auto before = p;
  AdamMoments st;
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  for (int i = 0; i < 5; ++i) adamw_step(p, std::vector<double>(3, 0.0), st, cfg);
  EXPECT_EQ(p, before);
}

TEST(AdamW, FirstStepMovesByLearningRate) {
  std::vector<double> p{1.0, 1.0};
  AdamMoments st;
  AdamConfig cfg;
  cfg.lr = 1e-3;
  cfg.weight_decay = 0.0;
  adamw_step(p, std::vector<double>{0.7, -30.0}, st, cfg);
  EXPECT_NEAR(p[0], 1.0 - 1e-3, 1e-9);
  EXPECT_NEAR(p[1], 1.0 + 1e-3, 1e-9);
}

TEST(AdamW, DecayIsDecoupledFromGradient) {
  std::vector<double> p{2.0};
  AdamMoments st;
  AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.5;
  adamw_step(p, std::vector<double>{0.0}, st, cfg);
  EXPECT_DOUBLE_EQ(p[0], 2.0 * (1.0 - 0.1 * 0.5));
}

TEST(AdamW, MismatchedGradientIsShapeError) {
  std::vector<double> p{1.0};
  AdamMoments st;
  EXPECT_THROW(adamw_step(p, std::vector<double>{1.0, 2.0}, st, {}), ShapeError);
}

TEST(AdamW, MinimisesQuadratic) {
  ParamStore ps;
  auto& x = ps.add("x", Tensor::parameter({2}, {3.0, -4.0}));
  AdamW opt({0.05, 0.9, 0.999, 1e-8, 0.0});
  for (int i = 0; i < 2000; ++i) {
    ps.zero_grad();
    backward(sum_all(mul(x, x)));
    opt.step(ps, ps.flat_grad());
  }
  EXPECT_NEAR(x.values()[0], 0.0, 1e-3);
  EXPECT_NEAR(x.values()[1], 0.0, 1e-3);
}

TEST(ParamStore, DuplicateNameIsContractError) {
  ParamStore ps;
  ps.add("a", Tensor::scalar(1.0, true));
  EXPECT_THROW(ps.add("a", Tensor::scalar(2.0, true)), ContractError);
  EXPECT_THROW(ps.get("b"), ContractError);
}

TEST(ParamStore, CloneIsIndependent) {
  ParamStore ps;
  ps.add("a", Tensor::parameter({2}, {1, 2}));
  auto copy = ps.clone();
  ps.entries()[0].second.mutable_values()[0] = 9.0;
  EXPECT_EQ(copy.get("a").values()[0], 1.0);
}

TEST(InitUniform, WithinFanInBound) {
  Rng rng = make_rng(3, 0);
  auto t = init_uniform({16, 9}, 9, rng);
  for (double v : t.values()) EXPECT_LE(std::abs(v), 1.0 / 3.0);
  EXPECT_TRUE(t.requires_grad());
}

TEST(Checkpoint, RoundTripIsExact) {
  Checkpoint ck;
  ck.metadata = {{"d", "24"}, {"note", "x y"}};
  ck.tensors.emplace_back("w", Tensor::constant({2, 3}, random_values(6, 9)));
  ck.tensors.emplace_back("b", Tensor::constant({1}, {-0.0}));
  const auto path = std::filesystem::temp_directory_path() / "irspla_numerics.ntb";
  write_checkpoint(ck, path.string());
  const auto back = read_checkpoint(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(back.metadata, ck.metadata);
  ASSERT_EQ(back.tensors.size(), 2u);
  EXPECT_EQ(back.tensor("w").shape(), (Shape{2, 3}));
  EXPECT_EQ(back.tensor("w").values(), ck.tensors[0].second.values());
  EXPECT_TRUE(std::signbit(back.tensor("b").values()[0]));
  EXPECT_EQ(encode_checkpoint(back), encode_checkpoint(ck));
}

TEST(Checkpoint, TruncationIsFormatError) {
  Checkpoint ck;
  ck.tensors.emplace_back("w", Tensor::constant({4}, {1, 2, 3, 4}));
  auto bytes = encode_checkpoint(ck);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(decode_checkpoint(bytes), FormatError);
  EXPECT_THROW(decode_checkpoint({'X', 'T', 'B', '1'}), FormatError);
}

TEST(Checkpoint, MissingFileIsIoError) { EXPECT_THROW(read_checkpoint("/nonexistent/dir/model.ntb"), IoError); }
