#include "idbpd/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "idbpd/projection.hpp"

namespace idbpd {

ImplicitEvaluation implicit_value_and_grad(const Problem& problem, const Vector& x,
                                           ImplicitFunction which, int eval_steps) {
  require_finite(x, "evaluation point");
  const bool objective = which == ImplicitFunction::kObjective;

  ImplicitEvaluation out;
  auto exact = objective ? problem.exact_max_y(x) : problem.exact_max_w(x);
  if (exact) {
    out.maximizer = std::move(exact->maximizer);
    out.value = exact->value;
  } else {
    if (eval_steps < 1)
      throw std::invalid_argument("evaluation needs eval_steps >= 1 without an exact maximizer");
    const FeasibleSet& set = objective ? problem.set_y() : problem.set_w();
    const RestrictedObjective h = objective ? problem.restrict_y(x) : problem.restrict_w(x);
    const Vector start = set.center_point();
    const double step =
        inner_stepsize(problem, objective ? DualBlock::kY : DualBlock::kW, x, start);
    auto result = inner_maximize(h.value, h.grad, set, start, {.steps = eval_steps, .stepsize = step});
    out.maximizer = std::move(result.maximizer);
    out.value = result.value;
    out.inner_steps = eval_steps;
  }
  require_finite(out.value, objective ? "f(x)" : "g(x)");
  out.grad = objective ? problem.grad_x_phi(x, out.maximizer) : problem.grad_x_psi(x, out.maximizer);
  require_finite(out.grad, objective ? "grad f(x)" : "grad g(x)");
  return out;
}

double KktReport::max_residual() const {
  return std::max({stationarity, infeasibility, slackness});
}

KktReport kkt_residuals(const Problem& problem, const Vector& x, double lambda, int eval_steps) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("KKT multiplier must be finite and nonnegative");
  const auto f = implicit_value_and_grad(problem, x, ImplicitFunction::kObjective, eval_steps);
  const auto g = implicit_value_and_grad(problem, x, ImplicitFunction::kConstraint, eval_steps);

  KktReport r;
  r.stationarity = (f.grad + lambda * g.grad).norm();
  r.infeasibility = std::max(g.value, 0.0);
  r.slackness = std::abs(lambda * g.value);
  r.f_value = f.value;
  r.g_value = g.value;
  r.eval_inner_steps = std::max(f.inner_steps, g.inner_steps);
  return r;
}

std::vector<KktReport> evaluate_trace(const IterateTrace& trace, const Problem& problem,
                                      int eval_steps) {
  std::vector<KktReport> reports;
  reports.reserve(trace.entries.size());
  for (const auto& e : trace.entries) reports.push_back(kkt_residuals(problem, e.x, e.lambda, eval_steps));
  return reports;
}

std::size_t best_index(const std::vector<KktReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("best iterate of an empty trace");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i)
    if (reports[i].max_residual() < reports[best].max_residual()) best = i;
  return best;
}

BestIterate best_iterate(const IterateTrace& trace, const Problem& problem, int eval_steps) {
  if (trace.entries.empty()) throw std::invalid_argument("best iterate of an empty trace");
  const auto reports = evaluate_trace(trace, problem, eval_steps);
  BestIterate out;
  out.index = best_index(reports);
  out.k = trace.entries[out.index].k;
  out.report = reports[out.index];
  return out;
}

}  // namespace idbpd
