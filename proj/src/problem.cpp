#include "idbpd/problem.hpp"

#include <cmath>

namespace idbpd {

FeasibleSet FeasibleSet::whole_space(Index dim) {
  if (dim < 1) throw std::invalid_argument("feasible set dimension must be positive");
  return FeasibleSet(Kind::kWholeSpace, dim);
}

FeasibleSet FeasibleSet::simplex(Index dim) {
  if (dim < 1) throw std::invalid_argument("feasible set dimension must be positive");
  return FeasibleSet(Kind::kSimplex, dim);
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
  if (lower.size() < 1 || lower.size() != upper.size())
    throw std::invalid_argument("box bounds must be nonempty and of equal length");
  if ((lower.array() > upper.array()).any())
    throw std::invalid_argument("box requires lower <= upper componentwise");
  if (lower.array().isNaN().any() || upper.array().isNaN().any())
    throw std::invalid_argument("box bounds must not be NaN");
  FeasibleSet s(Kind::kBox, lower.size());
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
  if (center.size() < 1) throw std::invalid_argument("ball center must be nonempty");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("ball radius must be positive and finite");
  require_finite(center, "ball center");
  FeasibleSet s(Kind::kBall, center.size());
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

Vector FeasibleSet::center_point() const {
  switch (kind_) {
    case Kind::kWholeSpace:
      return Vector::Zero(dim_);
    case Kind::kSimplex:
      return Vector::Constant(dim_, 1.0 / static_cast<double>(dim_));
    case Kind::kBox: {
      Vector c(dim_);
      for (Index i = 0; i < dim_; ++i) {
        const double lo = lower_[i], hi = upper_[i];
        if (std::isfinite(lo) && std::isfinite(hi))
          c[i] = 0.5 * (lo + hi);
        else
          c[i] = std::clamp(0.0, lo, hi);
      }
      return c;
    }
    case Kind::kBall:
      return center_;
  }
  return Vector::Zero(dim_);
}

std::optional<double> Smoothness::objective_lipschitz() const {
  if (!lxx_phi || !lxy_phi || !lyy_phi || !iota_phi) return std::nullopt;
  return *lxx_phi + *lyy_phi + (*lxy_phi) * (*lxy_phi) / *iota_phi;
}

std::optional<double> Smoothness::constraint_lipschitz() const {
  if (!lxx_psi || !lxw_psi || !lww_psi || !iota_psi) return std::nullopt;
  return *lxx_psi + *lww_psi + (*lxw_psi) * (*lxw_psi) / *iota_psi;
}

void Smoothness::validate() const {
  auto nonneg = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v >= 0.0 && std::isfinite(*v)))
      throw ConfigError(std::string("smoothness constant ") + name + " must be finite and >= 0");
  };
  auto positive = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0 && std::isfinite(*v)))
      throw ConfigError(std::string("smoothness constant ") + name + " must be finite and > 0");
  };
  nonneg(lxx_phi, "L_xx^phi");
  nonneg(lyy_phi, "L_yy^phi");
  nonneg(lxx_psi, "L_xx^psi");
  nonneg(lww_psi, "L_ww^psi");
  positive(lxy_phi, "L_xy^phi");
  positive(lxw_psi, "L_xw^psi");
  positive(iota_phi, "iota_phi");
  positive(iota_psi, "iota_psi");
}

RestrictedObjective Problem::restrict_y(const Vector& x) const {
  return {[this, x](const Vector& y) { return phi(x, y); },
          [this, x](const Vector& y) { return grad_y_phi(x, y); }};
}

RestrictedObjective Problem::restrict_w(const Vector& x) const {
  return {[this, x](const Vector& w) { return psi(x, w); },
          [this, x](const Vector& w) { return grad_w_psi(x, w); }};
}

double CountingProblem::phi(const Vector& x, const Vector& y) const {
  ++counts_.phi;
  const double v = inner_.phi(x, y);
  require_finite(v, "phi");
  return v;
}

Vector CountingProblem::grad_x_phi(const Vector& x, const Vector& y) const {
  ++counts_.grad;
  Vector g = inner_.grad_x_phi(x, y);
  require_finite(g, "grad_x phi");
  return g;
}

Vector CountingProblem::grad_y_phi(const Vector& x, const Vector& y) const {
  ++counts_.grad;
  Vector g = inner_.grad_y_phi(x, y);
  require_finite(g, "grad_y phi");
  return g;
}

double CountingProblem::psi(const Vector& x, const Vector& w) const {
  ++counts_.psi;
  const double v = inner_.psi(x, w);
  require_finite(v, "psi");
  return v;
}

Vector CountingProblem::grad_x_psi(const Vector& x, const Vector& w) const {
  ++counts_.grad;
  Vector g = inner_.grad_x_psi(x, w);
  require_finite(g, "grad_x psi");
  return g;
}

Vector CountingProblem::grad_w_psi(const Vector& x, const Vector& w) const {
  ++counts_.grad;
  Vector g = inner_.grad_w_psi(x, w);
  require_finite(g, "grad_w psi");
  return g;
}

std::optional<InnerMax> CountingProblem::exact_max_y(const Vector& x) const {
  auto r = inner_.exact_max_y(x);
  if (r) {
    ++counts_.exact;
    require_finite(r->value, "exact max_y value");
    require_finite(r->maximizer, "exact max_y maximizer");
  }
  return r;
}

std::optional<InnerMax> CountingProblem::exact_max_w(const Vector& x) const {
  auto r = inner_.exact_max_w(x);
  if (r) {
    ++counts_.exact;
    require_finite(r->value, "exact max_w value");
    require_finite(r->maximizer, "exact max_w maximizer");
  }
  return r;
}

namespace {
RestrictedObjective counted(RestrictedObjective base, std::uint64_t* value_counter,
                            std::uint64_t* grad_counter, const char* value_name,
                            const char* grad_name) {
  return {[f = std::move(base.value), value_counter, value_name](const Vector& u) {
            ++*value_counter;
            const double v = f(u);
            require_finite(v, value_name);
            return v;
          },
          [g = std::move(base.grad), grad_counter, grad_name](const Vector& u) {
            ++*grad_counter;
            Vector out = g(u);
            require_finite(out, grad_name);
            return out;
          }};
}
}  // namespace

RestrictedObjective CountingProblem::restrict_y(const Vector& x) const {
  return counted(inner_.restrict_y(x), &counts_.phi, &counts_.grad, "phi", "grad_y phi");
}

RestrictedObjective CountingProblem::restrict_w(const Vector& x) const {
  return counted(inner_.restrict_w(x), &counts_.psi, &counts_.grad, "psi", "grad_w psi");
}

double check_gradient(const ScalarField& value_fn, const VectorField& grad_fn, const Vector& point,
                      double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("step must be positive");
  require_finite(point, "gradient check point");
  const Vector analytic = grad_fn(point);
  require_finite(analytic, "analytic gradient");
  if (analytic.size() != point.size())
    throw std::invalid_argument("gradient dimension does not match point");

  double worst = 0.0;
  Vector probe = point;
  for (Index i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + step;
    const double up = value_fn(probe);
    probe[i] = point[i] - step;
    const double down = value_fn(probe);
    probe[i] = point[i];
    require_finite(up, "value at forward probe");
    require_finite(down, "value at backward probe");
    const double estimate = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(estimate - analytic[i]) / (1.0 + std::abs(analytic[i])));
  }
  return worst;
}

void validate_dims(const Problem& problem, const Vector& x, const Vector& y, const Vector& w) {
  if (x.size() != problem.dim_x())
    throw ConfigError("x has dimension " + std::to_string(x.size()) + ", problem expects " +
                      std::to_string(problem.dim_x()));
  if (y.size() != problem.set_y().dim())
    throw ConfigError("y has dimension " + std::to_string(y.size()) + ", problem expects " +
                      std::to_string(problem.set_y().dim()));
  if (w.size() != problem.set_w().dim())
    throw ConfigError("w has dimension " + std::to_string(w.size()) + ", problem expects " +
                      std::to_string(problem.set_w().dim()));
}

}  // namespace idbpd
