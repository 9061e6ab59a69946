#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "idbpd/problem.hpp"
#include "idbpd/problems/mlp.hpp"
#include "oracles.hpp"

using namespace idbpd;

TEST(CheckGradient, LinearFormIsExact) {
  const Vector y0 = (Vector(2) << 1, 2).finished();
  const double err = check_gradient([&](const Vector& x) { return x.dot(y0); },
                                    [&](const Vector&) { return y0; }, Vector::Zero(2), 1e-5);
  EXPECT_LT(err, 1e-8);
}

TEST(CheckGradient, ConstantHasZeroError) {
  oracle::Gen gen(1);
  const Vector p = gen.normal_vector(4);
  const double err = check_gradient([](const Vector&) { return 3.0; },
                                    [](const Vector& x) { return Vector::Zero(x.size()); }, p, 1e-5);
  EXPECT_LE(err, 1e-12);
}

TEST(CheckGradient, MlpCrossEntropyAndQuadraticDecay) {
  BlobParams bp;
  bp.samples = 40;
  bp.features = 3;
  const DatasetSplit split = make_blobs(bp);
  const MlpLayout layout = layout_for(split, 4);
  const Vector w = mlp_initial_weights(layout, 11);
  const Vector ones = Vector::Ones(split.task1.size());
  auto value = [&](const Vector& v) {
    return mlp_loss_and_grads(v, layout, split.task1, Task::kFirst).losses().sum();
  };
  auto grad = [&](const Vector& v) {
    return mlp_loss_and_grads(v, layout, split.task1, Task::kFirst).weighted_gradient(ones);
  };
  EXPECT_LT(check_gradient(value, grad, w, 1e-5), 1e-4);

  // Truncation error shrinks ~100x when the step shrinks 10x.
  const double coarse = check_gradient(value, grad, w, 1e-2);
  const double fine = check_gradient(value, grad, w, 1e-3);
  EXPECT_GT(coarse / fine, 30.0);
}

TEST(CheckGradient, RejectsBadStepAndNonFinite) {
  auto v = [](const Vector& x) { return x.sum(); };
  auto g = [](const Vector& x) { return Vector::Ones(x.size()); };
  EXPECT_THROW(check_gradient(v, g, Vector::Zero(2), 0.0), std::invalid_argument);
  EXPECT_THROW(check_gradient(v, g, Vector::Zero(2), -1e-3), std::invalid_argument);
  auto bad = [](const Vector& x) { return x[0] > 0 ? std::numeric_limits<double>::quiet_NaN() : 0.0; };
  EXPECT_THROW(check_gradient(bad, g, Vector::Zero(2), 1e-5), NumericError);
  Vector nan_point = Vector::Zero(2);
  nan_point[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(check_gradient(v, g, nan_point, 1e-5), NumericError);
}

namespace {

void expect_all_gradients_pass(const Problem& p, const Vector& center, double spread, std::uint64_t seed) {
  oracle::Gen gen(seed);
  for (int i = 0; i < 10; ++i) {
    const Vector x = center + gen.normal_vector(p.dim_x(), spread);
    const Vector y = p.set_y().kind() == FeasibleSet::Kind::kSimplex ? gen.simplex_point(p.set_y().dim())
                                                                      : gen.normal_vector(p.set_y().dim());
    const Vector w = gen.simplex_point(p.set_w().dim());
    EXPECT_LT(check_gradient([&](const Vector& v) { return p.phi(v, y); },
                             [&](const Vector& v) { return p.grad_x_phi(v, y); }, x, 1e-5),
              1e-4);
    EXPECT_LT(check_gradient([&](const Vector& v) { return p.phi(x, v); },
                             [&](const Vector& v) { return p.grad_y_phi(x, v); }, y, 1e-5),
              1e-4);
    EXPECT_LT(check_gradient([&](const Vector& v) { return p.psi(v, w); },
                             [&](const Vector& v) { return p.grad_x_psi(v, w); }, x, 1e-5),
              1e-4);
    EXPECT_LT(check_gradient([&](const Vector& v) { return p.psi(x, v); },
                             [&](const Vector& v) { return p.grad_w_psi(x, v); }, w, 1e-5),
              1e-4);
  }
}

}  // namespace

TEST(ShippedProblems, TestbedGradientsPassAtTenPoints) {
  const auto& tb = fixtures::canonical_testbed();
  expect_all_gradients_pass(*tb.problem, Vector::Zero(tb.problem->dim_x()), 1.0, 5);
}

TEST(ShippedProblems, DroMtlGradientsPassAtTenPoints) {
  auto p = fixtures::small_dro();
  expect_all_gradients_pass(*p, mlp_initial_weights(p->layout(), 2), 0.5, 6);
}

TEST(ShippedProblems, ExactMaximizerValueMatchesPhi) {
  oracle::Gen gen(9);
  const auto& tb = *fixtures::canonical_testbed().problem;
  auto dro = fixtures::small_dro();
  for (int i = 0; i < 10; ++i) {
    const Vector x = gen.normal_vector(tb.dim_x());
    const auto ey = tb.exact_max_y(x);
    ASSERT_TRUE(ey.has_value());
    EXPECT_NEAR(tb.phi(x, ey->maximizer), ey->value, 1e-10);
    EXPECT_NEAR(ey->value, tb.f(x), 1e-10);
    const auto ew = tb.exact_max_w(x);
    EXPECT_NEAR(tb.psi(x, ew->maximizer), ew->value, 1e-10);

    const Vector xd = mlp_initial_weights(dro->layout(), 100 + i);
    const auto dy = dro->exact_max_y(xd);
    ASSERT_TRUE(dy.has_value());
    EXPECT_NEAR(dro->phi(xd, dy->maximizer), dy->value, 1e-10);
  }
}

TEST(FeasibleSetDescriptor, RejectsInvalidShapes) {
  EXPECT_THROW(FeasibleSet::box((Vector(2) << 0, 1).finished(), (Vector(2) << 1, 0).finished()),
               std::invalid_argument);
  EXPECT_THROW(FeasibleSet::ball(Vector::Zero(2), 0.0), std::invalid_argument);
  EXPECT_THROW(FeasibleSet::ball(Vector::Zero(2), -1.0), std::invalid_argument);
  EXPECT_THROW(FeasibleSet::simplex(0), std::invalid_argument);
  EXPECT_THROW(FeasibleSet::whole_space(0), std::invalid_argument);
}

TEST(FeasibleSetDescriptor, CenterPoints) {
  EXPECT_TRUE(FeasibleSet::whole_space(3).center_point().isZero());
  EXPECT_TRUE(FeasibleSet::simplex(4).center_point().isApprox(Vector::Constant(4, 0.25)));
  const auto ball = FeasibleSet::ball((Vector(2) << 1, 2).finished(), 3.0);
  EXPECT_TRUE(ball.center_point().isApprox((Vector(2) << 1, 2).finished()));
}

TEST(Smoothness, RequiresPositiveCouplingConstants) {
  Smoothness s;
  s.lxy_phi = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.lxy_phi = 1.0;
  s.lxx_phi = -1.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.lxx_phi = 2.0;
  s.lyy_phi = 1.0;
  s.iota_phi = 1.0;
  EXPECT_NO_THROW(s.validate());
  ASSERT_TRUE(s.objective_lipschitz().has_value());
  EXPECT_DOUBLE_EQ(*s.objective_lipschitz(), 2.0 + 1.0 + 1.0);
  EXPECT_FALSE(Smoothness{}.objective_lipschitz().has_value());
}

TEST(CountingProblem, CountsEachOracleCall) {
  const auto& tb = *fixtures::canonical_testbed().problem;
  CountingProblem counted(tb);
  const Vector x = Vector::Zero(tb.dim_x());
  const Vector y = Vector::Zero(tb.set_y().dim());
  const Vector w = tb.set_w().center_point();
  counted.phi(x, y);
  counted.psi(x, w);
  counted.psi(x, w);
  counted.grad_x_phi(x, y);
  counted.grad_w_psi(x, w);
  counted.exact_max_y(x);
  const auto h = counted.restrict_w(x);
  h.value(w);
  h.grad(w);
  EXPECT_EQ(counted.counts().phi, 1u);
  EXPECT_EQ(counted.counts().psi, 3u);
  EXPECT_EQ(counted.counts().grad, 3u);
  EXPECT_EQ(counted.counts().exact, 1u);
  EXPECT_EQ(counted.counts().total(), 8u);
}

TEST(CountingProblem, NonFiniteOracleOutputIsHardError) {
  auto p = fixtures::projection_problem(Vector::Zero(2), (Vector(2) << 1, 0).finished(), 1.0);
  p->phi_fn = [](const Vector&, const Vector&) { return std::numeric_limits<double>::quiet_NaN(); };
  p->gxpsi = [](const Vector&, const Vector&) -> Vector {
    return Vector::Constant(2, std::numeric_limits<double>::infinity());
  };
  CountingProblem counted(*p);
  EXPECT_THROW(counted.phi(Vector::Zero(2), Vector::Zero(1)), NumericError);
  EXPECT_THROW(counted.grad_x_psi(Vector::Zero(2), Vector::Ones(1)), NumericError);
}

TEST(ValidateDims, ReportsMismatch) {
  const auto& tb = *fixtures::canonical_testbed().problem;
  const Vector y = Vector::Zero(tb.set_y().dim());
  const Vector w = tb.set_w().center_point();
  EXPECT_NO_THROW(validate_dims(tb, Vector::Zero(tb.dim_x()), y, w));
  EXPECT_THROW(validate_dims(tb, Vector::Zero(tb.dim_x() + 1), y, w), ConfigError);
  EXPECT_THROW(validate_dims(tb, Vector::Zero(tb.dim_x()), Vector::Zero(7), w), ConfigError);
  EXPECT_THROW(validate_dims(tb, Vector::Zero(tb.dim_x()), y, Vector::Zero(1)), ConfigError);
}
