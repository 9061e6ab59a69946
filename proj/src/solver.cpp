#include "idbpd/solver.hpp"

#include <chrono>
#include <cmath>

#include "idbpd/metrics.hpp"
#include "idbpd/projection.hpp"

namespace idbpd {

double inner_stepsize(const Problem& problem, DualBlock which, const Vector& x,
                      const Vector& start, double scale) {
  const Smoothness s = problem.smoothness();
  const auto& curvature = which == DualBlock::kY ? s.lyy_phi : s.lww_psi;
  if (curvature && *curvature > 0.0) return 1.0 / (scale * *curvature);

  const RestrictedObjective h = which == DualBlock::kY ? problem.restrict_y(x) : problem.restrict_w(x);
  const FeasibleSet& set = which == DualBlock::kY ? problem.set_y() : problem.set_w();
  if (scale == 1.0) return tune_ascent_stepsize(h.value, h.grad, set, start);
  return tune_ascent_stepsize([&](const Vector& u) { return scale * h.value(u); },
                              [&](const Vector& u) -> Vector { return scale * h.grad(u); }, set,
                              start);
}

namespace {

struct Iterates {
  Vector x, y, w;
};

Iterates initial_iterates(const Problem& problem, const SolverConfig& config) {
  Iterates it;
  it.x = config.x0;
  it.y = config.y0.value_or(problem.set_y().center_point());
  it.w = config.w0.value_or(problem.set_w().center_point());
  validate_dims(problem, it.x, it.y, it.w);
  it.y = project(it.y, problem.set_y());
  it.w = project(it.w, problem.set_w());
  require_finite(it.x, "x0");
  return it;
}

TraceEntry make_entry(const Problem& raw, int k, const Iterates& it, const DirectionResult& dir,
                      double alpha, double gphi_norm, double psi_val, std::int64_t ns) {
  TraceEntry e;
  e.k = k;
  e.x = it.x;
  e.y = it.y;
  e.w = it.w;
  e.lambda = dir.lambda;
  e.zeta = dir.zeta;
  e.rho = dir.rho;
  e.d_norm = dir.d.norm();
  e.psi_val = psi_val;
  e.phi_val = raw.phi(it.x, it.y);
  require_finite(e.phi_val, "phi (recorded)", k);
  e.alpha = alpha;
  e.gphi_norm = gphi_norm;
  e.wallclock_ns = ns;
  return e;
}

Vector update_dual(const CountingProblem& problem, DualBlock which, const Vector& x,
                   const Vector& start, int steps, double stepsize, bool momentum, bool exact) {
  if (exact) {
    auto m = which == DualBlock::kY ? problem.exact_max_y(x) : problem.exact_max_w(x);
    if (m) return std::move(m->maximizer);
  }
  const RestrictedObjective h = which == DualBlock::kY ? problem.restrict_y(x) : problem.restrict_w(x);
  const FeasibleSet& set = which == DualBlock::kY ? problem.set_y() : problem.set_w();
  return inner_maximize(h.value, h.grad, set, start,
                        {.steps = steps, .stepsize = stepsize, .momentum = momentum})
      .maximizer;
}

}  // namespace

IterateTrace solve(const Problem& problem, const SolverConfig& config) {
  config.schedule.validate();
  if (config.record_stride < 1) throw ConfigError("record_stride must be >= 1");
  const Smoothness smooth = problem.smoothness();
  smooth.validate();

  CountingProblem counted(problem);
  Iterates it = initial_iterates(problem, config);
  const Schedule& sched = config.schedule;

  std::optional<double> lip_sum;
  if (auto lf = smooth.objective_lipschitz(); lf && smooth.lxy_phi) lip_sum = *lf + *smooth.lxy_phi;

  IterateTrace trace;
  trace.method = "idbpd";
  trace.gamma = gamma_const(sched, lip_sum);
  const double gamma = trace.gamma;

  const auto clock_start = std::chrono::steady_clock::now();
  auto elapsed_ns = [&] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                                 clock_start)
        .count();
  };

  int k = 0;
  try {
    for (; k < sched.horizon; ++k) {
      const double alpha = alpha_at(sched, k);
      const Vector gphi = counted.grad_x_phi(it.x, it.y);
      const Vector gpsi = counted.grad_x_psi(it.x, it.w);
      const double psi_val = counted.psi(it.x, it.w);
      const DirectionResult dir = compute_direction(gphi, gpsi, psi_val, alpha);
      require_finite(dir.d, "direction", k);

      if (k % config.record_stride == 0)
        trace.entries.push_back(
            make_entry(problem, k, it, dir, alpha, gphi.norm(), psi_val, elapsed_ns()));

      if (config.stop_tolerance &&
          std::max(dir.d.norm(), std::max(psi_val, 0.0)) <= *config.stop_tolerance)
        break;

      it.x += gamma * dir.d;
      require_finite(it.x, "x", k);

      if (k == 0) {
        trace.stepsize_y = inner_stepsize(counted, DualBlock::kY, it.x, it.y);
        trace.stepsize_w = inner_stepsize(counted, DualBlock::kW, it.x, it.w);
      }
      const int n_steps = inner_steps(sched, k, DualBlock::kY);
      const int m_steps = inner_steps(sched, k, DualBlock::kW, std::max(psi_val, 0.0));
      it.y = update_dual(counted, DualBlock::kY, it.x, it.y, n_steps, trace.stepsize_y,
                         config.momentum, config.exact_inner);
      require_finite(it.y, "y", k);
      it.w = update_dual(counted, DualBlock::kW, it.x, it.w, m_steps, trace.stepsize_w,
                         config.momentum, config.exact_inner);
      require_finite(it.w, "w", k);
      trace.total_inner_steps_y += static_cast<std::uint64_t>(n_steps);
      trace.total_inner_steps_w += static_cast<std::uint64_t>(m_steps);

      if (config.max_oracle_calls && counted.counts().total() >= *config.max_oracle_calls) {
        ++k;
        break;
      }
    }
    trace.iterations = k;

    // Diagnostic record of the last iterate, evaluated on the raw problem so it
    // does not enter the oracle accounting.
    const double alpha = alpha_at(sched, std::min(k, sched.horizon - 1));
    const Vector gphi = problem.grad_x_phi(it.x, it.y);
    const Vector gpsi = problem.grad_x_psi(it.x, it.w);
    const double psi_val = problem.psi(it.x, it.w);
    require_finite(gphi, "grad_x phi (final)", k);
    require_finite(gpsi, "grad_x psi (final)", k);
    const DirectionResult dir = compute_direction(gphi, gpsi, psi_val, alpha);
    if (trace.entries.empty() || trace.entries.back().k != k) {
      trace.entries.push_back(make_entry(problem, k, it, dir, alpha, gphi.norm(), psi_val, elapsed_ns()));
    }
    trace.entries.back().final = true;
  } catch (const NumericError& e) {
    trace.iterations = k;
    trace.calls = counted.counts();
    throw SolveAborted(e, k, std::move(trace));
  }
  trace.calls = counted.counts();
  return trace;
}

FixedPointReport run_fixed_point_check(const Problem& problem, const SolverConfig& config,
                                       const Vector& x, double alpha, int eval_steps) {
  if (x.size() != problem.dim_x()) throw ConfigError("fixed-point check: x dimension mismatch");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be nonnegative");
  (void)config;
  const auto f = implicit_value_and_grad(problem, x, ImplicitFunction::kObjective, eval_steps);
  const auto g = implicit_value_and_grad(problem, x, ImplicitFunction::kConstraint, eval_steps);

  FixedPointReport out;
  out.direction = compute_direction(f.grad, g.grad, problem.psi(x, g.maximizer), alpha);
  out.d_norm = out.direction.d.norm();
  out.lambda = out.direction.lambda;
  out.y_star = f.maximizer;
  out.w_star = g.maximizer;
  return out;
}

}  // namespace idbpd
