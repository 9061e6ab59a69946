#pragma once

#include <cstdint>
#include <memory>

#include "idbpd/problem.hpp"

namespace idbpd {

/// Convex-concave synthetic instance with closed-form inner maxima:
///   phi(x,y) = y'(Ax + b) - (eta/2)||y||^2,            Y = R^m,
///   psi(x,w) = w'(Cx - c) - (reg*l/2)||w - 1/l||^2 - r,  W = simplex(l),
/// so f(x) = ||Ax + b||^2 / (2 eta) and g(x) is the regularized-simplex max
/// of Cx - c, minus r.
class QuadraticTestbed final : public Problem {
 public:
  QuadraticTestbed(Matrix a, Vector b, Matrix c_mat, Vector c, double eta, double reg, double r);

  Index dim_x() const override { return a_.cols(); }
  const FeasibleSet& set_y() const override { return set_y_; }
  const FeasibleSet& set_w() const override { return set_w_; }

  double phi(const Vector& x, const Vector& y) const override;
  Vector grad_x_phi(const Vector& x, const Vector& y) const override;
  Vector grad_y_phi(const Vector& x, const Vector& y) const override;
  double psi(const Vector& x, const Vector& w) const override;
  Vector grad_x_psi(const Vector& x, const Vector& w) const override;
  Vector grad_w_psi(const Vector& x, const Vector& w) const override;

  Smoothness smoothness() const override { return smoothness_; }
  std::optional<InnerMax> exact_max_y(const Vector& x) const override;
  std::optional<InnerMax> exact_max_w(const Vector& x) const override;

  /// Closed forms used by tests and the KKT oracle.
  double f(const Vector& x) const;
  Vector grad_f(const Vector& x) const;
  double g(const Vector& x) const;
  Vector grad_g(const Vector& x) const;

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  const Matrix& c_mat() const { return c_mat_; }
  const Vector& c() const { return c_; }
  double eta() const { return eta_; }
  double reg() const { return reg_; }
  double r() const { return r_; }

 private:
  Matrix a_;
  Vector b_;
  Matrix c_mat_;
  Vector c_;
  double eta_, reg_, r_;
  FeasibleSet set_y_, set_w_;
  Smoothness smoothness_;
};

struct TestbedParams {
  std::uint64_t seed = 42;
  int n = 3;
  int m = 2;
  int l = 3;
  double eta = 1.0;
  double reg = 0.5;
  double r = 0.0;
};

struct KktPoint {
  Vector x;
  double lambda = 0.0;
};

struct Testbed {
  std::shared_ptr<const QuadraticTestbed> problem;
  KktPoint kkt;
  /// Rays drawn before one crossed the boundary within the allowed radius.
  int attempts = 1;
  /// 1 when c was shifted up because g(0) >= 0 (only possible for r < 0).
  int c_repairs = 0;
};

/// Seeded instance with x = 0 strictly feasible (c > 0, shifted further when
/// r < 0 would make the origin infeasible) and a planted KKT
/// pair: x* is where a random ray from the origin crosses g = 0, and A, b are
/// fitted so that grad f(x*) = -lambda* grad g(x*) with lambda* in [0.2, 1].
/// Since f and g are convex, (x*, lambda*) solves min f s.t. g <= 0.
Testbed make_testbed(const TestbedParams& params);

/// KKT point of an existing instance by bisection on lambda over damped-Newton
/// minimizers of f + lambda g; x comes from the slightly infeasible side of
/// the bracket. With m < n the x-part need not be unique.
KktPoint solve_testbed_kkt(const QuadraticTestbed& problem);

}  // namespace idbpd
