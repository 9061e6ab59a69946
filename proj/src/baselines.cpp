#include "idbpd/baselines.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "idbpd/metrics.hpp"
#include "idbpd/projection.hpp"

namespace idbpd {

namespace {

class Stopwatch {
 public:
  std::int64_t ns() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                                start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

TraceEntry entry_at(int k, const Vector& x, const Vector& y, const Vector& w, double lambda,
                    const Vector& gphi, const Vector& gpsi, double psi_val, double phi_val,
                    double d_norm, std::int64_t ns) {
  TraceEntry e;
  e.k = k;
  e.x = x;
  e.y = y;
  e.w = w;
  e.lambda = lambda;
  e.rho = gpsi.norm();
  e.zeta = std::max(psi_val, 0.0) * e.rho;
  e.d_norm = d_norm;
  e.psi_val = psi_val;
  e.phi_val = phi_val;
  e.gphi_norm = gphi.norm();
  e.wallclock_ns = ns;
  return e;
}

RestrictedObjective scaled(RestrictedObjective h, double scale) {
  return {[f = std::move(h.value), scale](const Vector& u) { return scale * f(u); },
          [g = std::move(h.grad), scale](const Vector& u) -> Vector { return scale * g(u); }};
}

}  // namespace

void GdmaConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("GDMA penalty rho must be > 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("GDMA gamma must be >= 0");
  if (ascent_steps < 1) throw ConfigError("GDMA ascent_steps must be >= 1");
  if (horizon < 1) throw ConfigError("GDMA horizon must be >= 1");
  if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
}

IterateTrace gdma_solve(const Problem& problem, const GdmaConfig& config, const Vector& x0,
                        std::optional<Vector> y0, std::optional<Vector> w0) {
  config.validate();
  CountingProblem counted(problem);
  Vector x = x0;
  Vector y = y0.value_or(problem.set_y().center_point());
  Vector w = w0.value_or(problem.set_w().center_point());
  validate_dims(problem, x, y, w);
  y = project(y, problem.set_y());
  w = project(w, problem.set_w());
  require_finite(x, "x0");

  IterateTrace trace;
  trace.method = "gdma";
  trace.gamma = config.gamma;
  trace.stepsize_y = inner_stepsize(counted, DualBlock::kY, x, y);
  trace.stepsize_w = inner_stepsize(counted, DualBlock::kW, x, w, config.rho);
  const Stopwatch clock;

  auto ascend = [&](const Vector& at) {
    const auto hy = counted.restrict_y(at);
    y = inner_maximize(hy.value, hy.grad, problem.set_y(), y,
                       {.steps = config.ascent_steps, .stepsize = trace.stepsize_y,
                        .momentum = config.momentum})
            .maximizer;
    const auto hw = scaled(counted.restrict_w(at), config.rho);
    w = inner_maximize(hw.value, hw.grad, problem.set_w(), w,
                       {.steps = config.ascent_steps, .stepsize = trace.stepsize_w,
                        .momentum = config.momentum})
            .maximizer;
    trace.total_inner_steps_y += static_cast<std::uint64_t>(config.ascent_steps);
    trace.total_inner_steps_w += static_cast<std::uint64_t>(config.ascent_steps);
  };

  int k = 0;
  try {
    for (; k < config.horizon; ++k) {
      ascend(x);
      const Vector gphi = counted.grad_x_phi(x, y);
      const Vector gpsi = counted.grad_x_psi(x, w);
      const Vector d = -(gphi + config.rho * gpsi);
      if (k % config.record_stride == 0) {
        const double psi_val = problem.psi(x, w);
        const double phi_val = problem.phi(x, y);
        trace.entries.push_back(
            entry_at(k, x, y, w, config.rho, gphi, gpsi, psi_val, phi_val, d.norm(), clock.ns()));
      }
      x += config.gamma * d;
      require_finite(x, "x", k);
      if (config.max_oracle_calls && counted.counts().total() >= *config.max_oracle_calls) {
        ++k;
        break;
      }
    }
    trace.iterations = k;
    const Vector gphi = problem.grad_x_phi(x, y);
    const Vector gpsi = problem.grad_x_psi(x, w);
    const double psi_val = problem.psi(x, w);
    const double phi_val = problem.phi(x, y);
    require_finite(gphi, "grad_x phi (final)", k);
    require_finite(gpsi, "grad_x psi (final)", k);
    trace.entries.push_back(entry_at(k, x, y, w, config.rho, gphi, gpsi, psi_val, phi_val,
                                     (gphi + config.rho * gpsi).norm(), clock.ns()));
    trace.entries.back().final = true;
  } catch (const NumericError& e) {
    trace.iterations = k;
    trace.calls = counted.counts();
    throw SolveAborted(e, k, std::move(trace));
  }
  trace.calls = counted.counts();
  return trace;
}

void DiscretizationConfig::validate() const {
  if (outer_rounds < 1) throw ConfigError("discretization outer_rounds must be >= 1");
  if (inner_pd_iterations < 1) throw ConfigError("discretization inner_pd_iterations must be >= 1");
  if (!(violation_tolerance > 0.0)) throw ConfigError("violation_tolerance must be > 0");
  if (!(multiplier_step > 0.0)) throw ConfigError("multiplier_step must be > 0");
  if (max_active_constraints < 1)
    throw ConfigError("max_active_constraints must be >= 1 (the working set would be empty)");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("discretization gamma must be >= 0");
  if (ascent_steps_y < 1) throw ConfigError("ascent_steps_y must be >= 1");
  if (eval_steps < 1) throw ConfigError("eval_steps must be >= 1");
  if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
}

DiscretizationResult adaptive_discretization_solve(const Problem& problem,
                                                   const DiscretizationConfig& config,
                                                   const Vector& x0, std::optional<Vector> y0) {
  config.validate();
  CountingProblem counted(problem);
  Vector x = x0;
  Vector y = y0.value_or(problem.set_y().center_point());
  validate_dims(problem, x, y, problem.set_w().center_point());
  y = project(y, problem.set_y());
  require_finite(x, "x0");

  DiscretizationResult out;
  IterateTrace& trace = out.trace;
  trace.method = "discretization";
  trace.gamma = config.gamma;
  trace.stepsize_y = inner_stepsize(counted, DualBlock::kY, x, y);
  out.working_set.push_back(problem.set_w().center_point());
  out.multipliers.push_back(0.0);
  const Stopwatch clock;

  int k = 0;
  bool budget_hit = false;
  // Most violated working-set point at the current x, with its gradient.
  std::size_t worst = 0;
  std::vector<double> psi_vals;
  std::vector<Vector> psi_grads;

  auto evaluate_working_set = [&] {
    psi_vals.assign(out.working_set.size(), 0.0);
    psi_grads.assign(out.working_set.size(), Vector());
    worst = 0;
    for (std::size_t i = 0; i < out.working_set.size(); ++i) {
      psi_vals[i] = counted.psi(x, out.working_set[i]);
      psi_grads[i] = counted.grad_x_psi(x, out.working_set[i]);
      if (psi_vals[i] > psi_vals[worst]) worst = i;
    }
  };
  auto multiplier_sum = [&] {
    return std::accumulate(out.multipliers.begin(), out.multipliers.end(), 0.0);
  };

  try {
    for (int round = 0; round < config.outer_rounds && !budget_hit; ++round) {
      out.active_set_sizes.push_back(out.working_set.size());
      for (int it = 0; it < config.inner_pd_iterations; ++it, ++k) {
        const Vector gphi = counted.grad_x_phi(x, y);
        evaluate_working_set();
        Vector grad = gphi;
        for (std::size_t i = 0; i < out.working_set.size(); ++i)
          if (out.multipliers[i] > 0.0) grad += out.multipliers[i] * psi_grads[i];

        if (k % config.record_stride == 0)
          trace.entries.push_back(entry_at(k, x, y, out.working_set[worst], multiplier_sum(), gphi,
                                           psi_grads[worst], psi_vals[worst], problem.phi(x, y),
                                           grad.norm(), clock.ns()));

        x -= config.gamma * grad;
        require_finite(x, "x", k);
        const auto hy = counted.restrict_y(x);
        y = inner_maximize(hy.value, hy.grad, problem.set_y(), y,
                           {.steps = config.ascent_steps_y, .stepsize = trace.stepsize_y})
                .maximizer;
        trace.total_inner_steps_y += static_cast<std::uint64_t>(config.ascent_steps_y);
        for (std::size_t i = 0; i < out.multipliers.size(); ++i)
          out.multipliers[i] = std::max(out.multipliers[i] + config.multiplier_step * psi_vals[i], 0.0);

        if (config.max_oracle_calls && counted.counts().total() >= *config.max_oracle_calls) {
          budget_hit = true;
          ++k;
          break;
        }
      }
      ++out.rounds;
      if (budget_hit) break;

      const auto g = implicit_value_and_grad(counted, x, ImplicitFunction::kConstraint, config.eval_steps);
      trace.total_inner_steps_w += static_cast<std::uint64_t>(g.inner_steps);
      if (g.value <= config.violation_tolerance) {
        out.converged = true;
        break;
      }
      out.working_set.push_back(g.maximizer);
      out.multipliers.push_back(0.0);
      while (out.working_set.size() > static_cast<std::size_t>(config.max_active_constraints)) {
        out.working_set.erase(out.working_set.begin());
        out.multipliers.erase(out.multipliers.begin());
      }
    }
    trace.iterations = k;

    const Vector gphi = problem.grad_x_phi(x, y);
    std::size_t final_worst = 0;
    double final_psi = problem.psi(x, out.working_set[0]);
    for (std::size_t i = 1; i < out.working_set.size(); ++i) {
      const double v = problem.psi(x, out.working_set[i]);
      if (v > final_psi) {
        final_psi = v;
        final_worst = i;
      }
    }
    Vector grad = gphi;
    for (std::size_t i = 0; i < out.working_set.size(); ++i)
      if (out.multipliers[i] > 0.0) grad += out.multipliers[i] * problem.grad_x_psi(x, out.working_set[i]);
    require_finite(grad, "Lagrangian gradient (final)", k);
    trace.entries.push_back(entry_at(k, x, y, out.working_set[final_worst], multiplier_sum(), gphi,
                                     problem.grad_x_psi(x, out.working_set[final_worst]), final_psi,
                                     problem.phi(x, y), grad.norm(), clock.ns()));
    trace.entries.back().final = true;
  } catch (const NumericError& e) {
    trace.iterations = k;
    trace.calls = counted.counts();
    throw SolveAborted(e, k, std::move(trace));
  }
  trace.calls = counted.counts();
  return out;
}

}  // namespace idbpd
