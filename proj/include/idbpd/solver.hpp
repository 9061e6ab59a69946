#pragma once

#include <optional>
#include <string>
#include <vector>

#include "idbpd/direction.hpp"
#include "idbpd/problem.hpp"
#include "idbpd/schedule.hpp"

namespace idbpd {

struct SolverConfig {
  Schedule schedule;
  Vector x0;
  /// Defaults to the set's center point.
  std::optional<Vector> y0, w0;
  int record_stride = 1;
  bool momentum = false;
  std::uint64_t seed = 0;
  /// Replace the inner ascent by the problem's exact maximizers when it has them.
  bool exact_inner = false;
  /// Stop once max(||d_k||, [psi(x_k,w_k)]_+) falls to this level.
  std::optional<double> stop_tolerance;
  /// Stop after the iteration in which the oracle-call total reaches this.
  std::optional<std::uint64_t> max_oracle_calls;
};

struct TraceEntry {
  int k = 0;
  Vector x, y, w;
  double lambda = 0.0;
  double zeta = 0.0;
  double rho = 0.0;
  double d_norm = 0.0;
  double psi_val = 0.0;
  double phi_val = 0.0;
  double alpha = 0.0;
  double gphi_norm = 0.0;
  std::int64_t wallclock_ns = 0;
  /// The post-loop iterate. Its lambda/d fields are a diagnostic evaluation at
  /// the last alpha of the schedule, not an algorithm step.
  bool final = false;
};

struct IterateTrace {
  std::string method;
  std::vector<TraceEntry> entries;
  int iterations = 0;
  OracleCounts calls;
  double gamma = 0.0;
  double stepsize_y = 0.0;
  double stepsize_w = 0.0;
  std::uint64_t total_inner_steps_y = 0;
  std::uint64_t total_inner_steps_w = 0;

  const TraceEntry& final_entry() const { return entries.back(); }
};

/// NumericError that also carries everything recorded before the abort.
class SolveAborted : public NumericError {
 public:
  SolveAborted(const NumericError& cause, long iteration, IterateTrace partial)
      : NumericError(cause.quantity(), iteration), partial_(std::move(partial)) {}

  const IterateTrace& partial() const { return partial_; }

 private:
  IterateTrace partial_;
};

/// Runs the dynamic-barrier primal-dual iteration for schedule.horizon steps:
/// direction from (x_k, y_k, w_k, alpha_k), x_{k+1} = x_k + gamma d_k, then N_k
/// ascent steps on phi(x_{k+1}, .) warm-started at y_k and M_k on psi(x_{k+1}, .)
/// warm-started at w_k. Records every record_stride-th iterate plus the final one.
IterateTrace solve(const Problem& problem, const SolverConfig& config);

struct FixedPointReport {
  double d_norm = 0.0;
  double lambda = 0.0;
  DirectionResult direction;
  Vector y_star, w_star;
};

/// One direction evaluation at x with evaluation-grade dual maximizers. The
/// default alpha = 0 gives the limiting direction, which vanishes at a KKT
/// point approached from the infeasible side.
FixedPointReport run_fixed_point_check(const Problem& problem, const SolverConfig& config,
                                       const Vector& x, double alpha = 0.0,
                                       int eval_steps = 500);

/// Inner ascent stepsize for a dual block: 1/L when the problem supplies the
/// constant, otherwise a line search at (x, start).
double inner_stepsize(const Problem& problem, DualBlock which, const Vector& x,
                      const Vector& start, double scale = 1.0);

}  // namespace idbpd
