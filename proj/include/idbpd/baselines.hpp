#pragma once

#include <optional>
#include <vector>

#include "idbpd/solver.hpp"

namespace idbpd {

/// Gradient descent multi-ascent on the penalized problem
/// min_x max_{y,w} phi(x,y) + rho * psi(x,w).
struct GdmaConfig {
  double rho = 1.0;
  double gamma = 1e-3;
  int ascent_steps = 10;
  int horizon = 1;
  int record_stride = 1;
  bool momentum = false;
  std::optional<std::uint64_t> max_oracle_calls;

  void validate() const;
};

/// Trace entries use lambda = rho, the fixed weight playing the multiplier's role.
IterateTrace gdma_solve(const Problem& problem, const GdmaConfig& config, const Vector& x0,
                        std::optional<Vector> y0 = std::nullopt,
                        std::optional<Vector> w0 = std::nullopt);

/// Adaptive discretization of W (most-violated-point exchange) with a
/// gradient-descent / multiplier-ascent Lagrangian subsolver on the finite
/// working set.
struct DiscretizationConfig {
  int outer_rounds = 20;
  int inner_pd_iterations = 50;
  double violation_tolerance = 1e-4;
  double multiplier_step = 1.0;
  int max_active_constraints = 20;
  double gamma = 1e-3;
  int ascent_steps_y = 2;
  int eval_steps = 500;
  int record_stride = 1;
  std::optional<std::uint64_t> max_oracle_calls;

  void validate() const;
};

struct DiscretizationResult {
  /// Iteration counter k runs over subsolver iterations across all rounds;
  /// lambda is the sum of the working-set multipliers.
  IterateTrace trace;
  /// Working-set size at the start of each round.
  std::vector<std::size_t> active_set_sizes;
  std::vector<Vector> working_set;
  std::vector<double> multipliers;
  int rounds = 0;
  bool converged = false;
};

DiscretizationResult adaptive_discretization_solve(const Problem& problem,
                                                   const DiscretizationConfig& config,
                                                   const Vector& x0,
                                                   std::optional<Vector> y0 = std::nullopt);

}  // namespace idbpd
