#include <gtest/gtest.h>

#include <cmath>

#include "testing.hpp"
#include "xner/autodiff.hpp"
#include "xner/error.hpp"
#include "xner/gradcheck.hpp"

using namespace xner;
using namespace xner::ad;

namespace {

Tensor row_vec(std::initializer_list<double> v) {
  Tensor t(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) t(0, i++) = x;
  return t;
}

}  // namespace

TEST(Autodiff, SquareGradient) {
  Graph g;
  Var x = g.variable(row_vec({1, 2}));
  Var loss = sum(mul(x, x));
  g.backward(loss);
  EXPECT_EQ(*g.grad(x), row_vec({2, 4}));
  EXPECT_DOUBLE_EQ(loss.scalar(), 5.0);
}

TEST(Autodiff, ReusedNodeAccumulates) {
  Graph g;
  Var x = g.variable(row_vec({1, 2, 3}));
  g.backward(add(sum(x), sum(x)));
  EXPECT_EQ(*g.grad(x), row_vec({2, 2, 2}));
}

TEST(Autodiff, ConstantsGetNoGradient) {
  Graph g;
  Var c = g.constant(row_vec({1, 2}));
  Var x = g.variable(row_vec({3, 4}));
  g.backward(sum(mul(c, x)));
  EXPECT_EQ(g.grad(c), nullptr);
  EXPECT_FALSE(g.requires_grad(c));
  EXPECT_EQ(*g.grad(x), row_vec({1, 2}));
}

TEST(Autodiff, ParameterGradientsAccumulateAcrossGraphs) {
  Parameter p("p", row_vec({1, -1}));
  for (int k = 0; k < 2; ++k) {
    Graph g;
    g.backward(sum(scale(g.param(p), 3.0)));
  }
  EXPECT_EQ(p.grad, row_vec({6, 6}));
  p.zero_grad();
  EXPECT_EQ(p.grad, row_vec({0, 0}));
}

TEST(Autodiff, FrozenParameterIsSkipped) {
  Parameter p("p", row_vec({1, 2}), false);
  Graph g;
  Var v = g.param(p);
  g.backward(sum(v));
  EXPECT_EQ(g.grad(v), nullptr);
  EXPECT_TRUE(p.grad.size() == 0 || p.grad.isZero());
}

TEST(Autodiff, BackwardNeedsAScalar) {
  Graph g;
  Var x = g.variable(row_vec({1, 2}));
  EXPECT_THROW(g.backward(x), std::invalid_argument);
}

TEST(Autodiff, ShapeErrorsNameTheOp) {
  Graph g;
  Var a = g.variable(Tensor::Zero(2, 3));
  Var b = g.variable(Tensor::Zero(2, 3));
  try {
    matmul(a, b);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos);
  }
  EXPECT_THROW(add(a, g.variable(Tensor::Zero(3, 2))), std::invalid_argument);
  EXPECT_THROW(mul(a, g.variable(Tensor::Zero(1, 3))), std::invalid_argument);
  EXPECT_THROW(concat({a, g.variable(Tensor::Zero(3, 3))}, 1), std::invalid_argument);
  EXPECT_THROW(slice(a, 1, 2, 0, 1), std::invalid_argument);
}

TEST(Autodiff, NonFiniteValuesRaiseNumericalError) {
  Graph g;
  Var x = g.variable(row_vec({1e308, 1e308}));
  EXPECT_THROW(scale(x, 10.0), NumericalError);
}

TEST(Autodiff, SoftmaxAndLogSumExpAreStable) {
  Graph g;
  Var x = g.variable(row_vec({1000, 1000, 1000}));
  Var s = softmax(x);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(s.value()(0, j), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(log_sum_exp(x).scalar(), 1000.0 + std::log(3.0), 1e-12);
}

TEST(Autodiff, CanonicalSumIgnoresOrder) {
  std::vector<double> a = {1e16, 1.0, -1e16, 3.5, 1e-3};
  std::vector<double> b = {3.5, -1e16, 1e-3, 1.0, 1e16};
  EXPECT_EQ(canonical_sum(a), canonical_sum(b));
}

TEST(Autodiff, DropoutMaskScalesKeptUnits) {
  std::mt19937_64 rng(1);
  Tensor m = dropout_mask(50, 40, 0.5, rng);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = m.data()[i];
    EXPECT_TRUE(v == 0.0 || v == 2.0);
  }
  EXPECT_NEAR(m.mean(), 1.0, 0.1);
  EXPECT_TRUE(dropout_mask(3, 3, 0.0, rng).isOnes());
}

TEST(GradientCheck, QuadraticFormIsExact) {
  std::mt19937_64 rng(2);
  Tensor a = testutil::random_matrix(4, 4, rng);
  Tensor sym = a * a.transpose();
  Parameter x("x", testutil::random_matrix(1, 4, rng));
  auto loss = [&](Graph& g) {
    Var xv = g.param(x);
    return sum(mul(matmul(xv, g.constant(sym)), xv));
  };
  EXPECT_LT(gradient_check(loss, {&x}).max_relative_error, 1e-9);
}

TEST(GradientCheck, EveryPrimitiveBelowTolerance) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (const auto& c : primitive_gradchecks(seed)) {
      EXPECT_LT(c.result.max_relative_error, 1e-6) << c.name << " seed " << seed << " " << c.result.worst;
    }
  }
}

TEST(GradientCheck, DetectsAWrongGradient) {
  Parameter x("x", row_vec({0.3, -0.7}));
  // A custom node whose backward claims d/dx = 1 while forward computes x^2.
  auto loss = [&](Graph& g) {
    Var xv = g.param(x);
    Tensor v = xv.value().cwiseProduct(xv.value());
    Var y = g.emit(v, {xv.id}, [](Graph& gr, std::size_t self) {
      *gr.grad_buffer(gr.parent(self, 0)) += gr.grad_of(self);
    }, "bad_square");
    return sum(y);
  };
  EXPECT_GT(gradient_check(loss, {&x}).max_relative_error, 0.1);
}

TEST(GradientCheck, MatmulOrderInvariantMatchesMatmul) {
  std::mt19937_64 rng(7);
  Graph g;
  Var a = g.constant(testutil::random_matrix(5, 7, rng));
  Var b = g.constant(testutil::random_matrix(7, 3, rng));
  EXPECT_LT((matmul(a, b).value() - matmul_order_invariant(a, b).value()).norm(), 1e-12);
}
