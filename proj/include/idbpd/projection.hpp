#pragma once

#include <vector>

#include "idbpd/problem.hpp"

namespace idbpd {

/// Euclidean projection onto the unit simplex {u >= 0, sum u = 1}
/// (sort-and-threshold).
Vector project_simplex(const Vector& v);

/// Euclidean projection onto `set`.
Vector project(const Vector& v, const FeasibleSet& set);

struct InnerAscentOptions {
  int steps = 1;
  double stepsize = 1.0;
  bool momentum = false;
  bool record_trajectory = false;
};

struct InnerMaxResult {
  Vector maximizer;
  double value = 0.0;
  int steps_taken = 0;
  /// h at the projected start followed by h after every step; empty unless
  /// requested.
  std::vector<double> value_trajectory;
};

/// Projected gradient ascent on h over `set`, optionally with Nesterov-style
/// extrapolation.
InnerMaxResult inner_maximize(const ScalarField& h_value, const VectorField& h_grad,
                              const FeasibleSet& set, const Vector& start,
                              const InnerAscentOptions& options);

/// Largest power-of-two stepsize s for which one projected step from `start`
/// satisfies h(u+) >= h(u) + ||u+ - u||^2 / (2s). Found by doubling from 1
/// while the test passes, halving while it fails.
double tune_ascent_stepsize(const ScalarField& h_value, const VectorField& h_grad,
                            const FeasibleSet& set, const Vector& start);

/// max over the simplex of w'loss - (reg*m/2)||w - 1/m||^2, in closed form.
InnerMax closed_form_regularized_simplex_max(const Vector& loss, double reg);

}  // namespace idbpd
