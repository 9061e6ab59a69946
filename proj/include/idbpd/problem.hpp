#pragma once

#include <optional>

#include "idbpd/common.hpp"

namespace idbpd {

/// Convex set a dual block lives in.
class FeasibleSet {
 public:
  enum class Kind { kWholeSpace, kSimplex, kBox, kBall };

  static FeasibleSet whole_space(Index dim);
  static FeasibleSet simplex(Index dim);
  static FeasibleSet box(Vector lower, Vector upper);
  static FeasibleSet ball(Vector center, double radius);

  Kind kind() const { return kind_; }
  Index dim() const { return dim_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

  /// Default starting point: origin, uniform distribution, box midpoint
  /// (clamped for infinite bounds), or ball center.
  Vector center_point() const;

 private:
  FeasibleSet(Kind kind, Index dim) : kind_(kind), dim_(dim) {}

  Kind kind_;
  Index dim_;
  Vector lower_, upper_, center_;
  double radius_ = 0.0;
};

/// Lipschitz and curvature constants. Any of them may be unknown; solver modes
/// that need a missing constant refuse to run.
struct Smoothness {
  std::optional<double> lxx_phi, lxy_phi, lyy_phi;
  std::optional<double> lxx_psi, lxw_psi, lww_psi;
  // Strong-concavity modulus (or squared PL constant) of phi(x,.) and psi(x,.).
  std::optional<double> iota_phi, iota_psi;

  /// Gradient Lipschitz constant of f(x) = max_y phi(x,y), or nullopt when
  /// the needed constants are missing.
  std::optional<double> objective_lipschitz() const;
  std::optional<double> constraint_lipschitz() const;

  void validate() const;
};

struct InnerMax {
  Vector maximizer;
  double value = 0.0;
};

/// h(x, .) with x frozen. Problems may cache per-x work in the closures.
struct RestrictedObjective {
  ScalarField value;
  VectorField grad;
};

/// Oracle interface for min_x max_{y in Y} phi(x,y) s.t. psi(x,w) <= 0 for
/// all w in W. Implementations are immutable after construction and must be
/// safe for concurrent const calls.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual Index dim_x() const = 0;
  virtual const FeasibleSet& set_y() const = 0;
  virtual const FeasibleSet& set_w() const = 0;

  virtual double phi(const Vector& x, const Vector& y) const = 0;
  virtual Vector grad_x_phi(const Vector& x, const Vector& y) const = 0;
  virtual Vector grad_y_phi(const Vector& x, const Vector& y) const = 0;

  virtual double psi(const Vector& x, const Vector& w) const = 0;
  virtual Vector grad_x_psi(const Vector& x, const Vector& w) const = 0;
  virtual Vector grad_w_psi(const Vector& x, const Vector& w) const = 0;

  virtual Smoothness smoothness() const { return {}; }

  virtual std::optional<InnerMax> exact_max_y(const Vector&) const { return std::nullopt; }
  virtual std::optional<InnerMax> exact_max_w(const Vector&) const { return std::nullopt; }

  virtual RestrictedObjective restrict_y(const Vector& x) const;
  virtual RestrictedObjective restrict_w(const Vector& x) const;
};

struct OracleCounts {
  std::uint64_t phi = 0;
  std::uint64_t psi = 0;
  std::uint64_t grad = 0;
  std::uint64_t exact = 0;

  std::uint64_t total() const { return phi + psi + grad + exact; }
};

/// Wraps a problem for a single run: counts every oracle call and turns
/// non-finite oracle output into NumericError. Not shareable across threads;
/// the wrapped problem is.
class CountingProblem final : public Problem {
 public:
  explicit CountingProblem(const Problem& inner) : inner_(inner) {}

  Index dim_x() const override { return inner_.dim_x(); }
  const FeasibleSet& set_y() const override { return inner_.set_y(); }
  const FeasibleSet& set_w() const override { return inner_.set_w(); }

  double phi(const Vector& x, const Vector& y) const override;
  Vector grad_x_phi(const Vector& x, const Vector& y) const override;
  Vector grad_y_phi(const Vector& x, const Vector& y) const override;
  double psi(const Vector& x, const Vector& w) const override;
  Vector grad_x_psi(const Vector& x, const Vector& w) const override;
  Vector grad_w_psi(const Vector& x, const Vector& w) const override;

  Smoothness smoothness() const override { return inner_.smoothness(); }
  std::optional<InnerMax> exact_max_y(const Vector& x) const override;
  std::optional<InnerMax> exact_max_w(const Vector& x) const override;
  RestrictedObjective restrict_y(const Vector& x) const override;
  RestrictedObjective restrict_w(const Vector& x) const override;

  const OracleCounts& counts() const { return counts_; }
  const Problem& inner() const { return inner_; }

 private:
  const Problem& inner_;
  mutable OracleCounts counts_;
};

/// Max over coordinates of |central difference - analytic| / (1 + |analytic|).
double check_gradient(const ScalarField& value_fn, const VectorField& grad_fn, const Vector& point,
                      double step);

void validate_dims(const Problem& problem, const Vector& x, const Vector& y, const Vector& w);

}  // namespace idbpd
