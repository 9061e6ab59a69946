#include "idbpd/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace idbpd {

Vector project_simplex(const Vector& v) {
  if (v.size() == 0) throw std::invalid_argument("cannot project an empty vector onto the simplex");
  require_finite(v, "simplex projection input");

  const Index n = v.size();
  // Stable descending sort on indices keeps ties in input order.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return v[a] > v[b]; });

  double cumulative = 0.0;
  double threshold = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumulative += v[order[static_cast<std::size_t>(j)]];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (v[order[static_cast<std::size_t>(j)]] - candidate > 0.0) threshold = candidate;
  }
  return (v.array() - threshold).max(0.0).matrix();
}

Vector project(const Vector& v, const FeasibleSet& set) {
  if (v.size() != set.dim())
    throw std::invalid_argument("projection: vector dimension " + std::to_string(v.size()) +
                                " does not match set dimension " + std::to_string(set.dim()));
  switch (set.kind()) {
    case FeasibleSet::Kind::kWholeSpace:
      return v;
    case FeasibleSet::Kind::kSimplex:
      return project_simplex(v);
    case FeasibleSet::Kind::kBox:
      return v.cwiseMax(set.lower()).cwiseMin(set.upper());
    case FeasibleSet::Kind::kBall: {
      const Vector offset = v - set.center();
      const double dist = offset.norm();
      if (dist <= set.radius()) return v;
      return set.center() + offset * (set.radius() / dist);
    }
  }
  return v;
}

InnerMaxResult inner_maximize(const ScalarField& h_value, const VectorField& h_grad,
                              const FeasibleSet& set, const Vector& start,
                              const InnerAscentOptions& options) {
  if (options.steps < 1) throw std::invalid_argument("inner_maximize requires steps >= 1");
  if (!(options.stepsize > 0.0) || !std::isfinite(options.stepsize))
    throw std::invalid_argument("inner_maximize requires a positive stepsize");

  InnerMaxResult result;
  Vector u = project(start, set);
  if (options.record_trajectory) {
    result.value_trajectory.reserve(static_cast<std::size_t>(options.steps) + 1);
    result.value_trajectory.push_back(h_value(u));
  }

  Vector previous = u;
  double t = 1.0;
  for (int step = 0; step < options.steps; ++step) {
    Vector anchor = u;
    if (options.momentum) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      anchor = u + ((t - 1.0) / t_next) * (u - previous);
      t = t_next;
    }
    const Vector g = h_grad(anchor);
    require_finite(g, "inner ascent gradient", step);
    previous = u;
    u = project(anchor + options.stepsize * g, set);
    require_finite(u, "inner ascent iterate", step);
    if (options.record_trajectory) result.value_trajectory.push_back(h_value(u));
  }

  result.value = h_value(u);
  require_finite(result.value, "inner ascent value");
  result.maximizer = std::move(u);
  result.steps_taken = options.steps;
  return result;
}

double tune_ascent_stepsize(const ScalarField& h_value, const VectorField& h_grad,
                            const FeasibleSet& set, const Vector& start) {
  const Vector u = project(start, set);
  const double base = h_value(u);
  const Vector g = h_grad(u);
  require_finite(base, "line-search value");
  require_finite(g, "line-search gradient");

  auto sufficient = [&](double s) {
    const Vector next = project(u + s * g, set);
    const double moved = (next - u).squaredNorm();
    if (moved == 0.0) return true;
    const double value = h_value(next);
    return std::isfinite(value) && value >= base + moved / (2.0 * s);
  };

  constexpr int kMaxHalvings = 60;
  constexpr int kMaxDoublings = 30;
  double s = 1.0;
  if (sufficient(s)) {
    for (int i = 0; i < kMaxDoublings && sufficient(2.0 * s); ++i) s *= 2.0;
    return s;
  }
  for (int i = 0; i < kMaxHalvings; ++i) {
    s *= 0.5;
    if (sufficient(s)) return s;
  }
  throw NumericError("inner ascent line search (no admissible stepsize)");
}

InnerMax closed_form_regularized_simplex_max(const Vector& loss, double reg) {
  if (!(reg > 0.0) || !std::isfinite(reg))
    throw std::invalid_argument("regularization must be positive");
  if (loss.size() == 0) throw std::invalid_argument("loss vector must be nonempty");
  require_finite(loss, "loss vector");

  const double m = static_cast<double>(loss.size());
  const Vector uniform = Vector::Constant(loss.size(), 1.0 / m);
  InnerMax out;
  out.maximizer = project_simplex(uniform + loss / (reg * m));
  out.value = out.maximizer.dot(loss) - 0.5 * reg * m * (out.maximizer - uniform).squaredNorm();
  return out;
}

}  // namespace idbpd
