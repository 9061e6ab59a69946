#include "idbpd/problems/testbed.hpp"

#include <cmath>
#include <random>

#include "idbpd/projection.hpp"

namespace idbpd {

QuadraticTestbed::QuadraticTestbed(Matrix a, Vector b, Matrix c_mat, Vector c, double eta,
                                   double reg, double r)
    : a_(std::move(a)),
      b_(std::move(b)),
      c_mat_(std::move(c_mat)),
      c_(std::move(c)),
      eta_(eta),
      reg_(reg),
      r_(r),
      set_y_(FeasibleSet::whole_space(std::max<Index>(a_.rows(), 1))),
      set_w_(FeasibleSet::simplex(std::max<Index>(c_mat_.rows(), 1))) {
  if (a_.rows() < 1 || a_.cols() < 1 || c_mat_.rows() < 1)
    throw std::invalid_argument("testbed dimensions must be >= 1");
  if (b_.size() != a_.rows() || c_mat_.cols() != a_.cols() || c_.size() != c_mat_.rows())
    throw std::invalid_argument("testbed matrix/vector shapes are inconsistent");
  if (!(eta_ > 0.0) || !(reg_ > 0.0)) throw std::invalid_argument("eta and reg must be > 0");
  if (!std::isfinite(r_)) throw std::invalid_argument("threshold r must be finite");

  const double l = static_cast<double>(c_mat_.rows());
  const double norm_a = Eigen::JacobiSVD<Matrix>(a_).singularValues()(0);
  const double norm_c = Eigen::JacobiSVD<Matrix>(c_mat_).singularValues()(0);
  smoothness_.lxx_phi = 0.0;
  smoothness_.lxy_phi = std::max(norm_a, 1e-12);
  smoothness_.lyy_phi = eta_;
  smoothness_.iota_phi = eta_;
  smoothness_.lxx_psi = 0.0;
  smoothness_.lxw_psi = std::max(norm_c, 1e-12);
  smoothness_.lww_psi = reg_ * l;
  smoothness_.iota_psi = reg_ * l;
}

double QuadraticTestbed::phi(const Vector& x, const Vector& y) const {
  return y.dot(a_ * x + b_) - 0.5 * eta_ * y.squaredNorm();
}

Vector QuadraticTestbed::grad_x_phi(const Vector&, const Vector& y) const {
  return a_.transpose() * y;
}

Vector QuadraticTestbed::grad_y_phi(const Vector& x, const Vector& y) const {
  return a_ * x + b_ - eta_ * y;
}

double QuadraticTestbed::psi(const Vector& x, const Vector& w) const {
  const double l = static_cast<double>(w.size());
  const Vector uniform = Vector::Constant(w.size(), 1.0 / l);
  return w.dot(c_mat_ * x - c_) - 0.5 * reg_ * l * (w - uniform).squaredNorm() - r_;
}

Vector QuadraticTestbed::grad_x_psi(const Vector&, const Vector& w) const {
  return c_mat_.transpose() * w;
}

Vector QuadraticTestbed::grad_w_psi(const Vector& x, const Vector& w) const {
  const double l = static_cast<double>(w.size());
  return c_mat_ * x - c_ - reg_ * l * (w - Vector::Constant(w.size(), 1.0 / l));
}

std::optional<InnerMax> QuadraticTestbed::exact_max_y(const Vector& x) const {
  InnerMax out;
  const Vector v = a_ * x + b_;
  out.maximizer = v / eta_;
  out.value = v.squaredNorm() / (2.0 * eta_);
  return out;
}

std::optional<InnerMax> QuadraticTestbed::exact_max_w(const Vector& x) const {
  InnerMax out = closed_form_regularized_simplex_max(c_mat_ * x - c_, reg_);
  out.value -= r_;
  return out;
}

double QuadraticTestbed::f(const Vector& x) const { return exact_max_y(x)->value; }
Vector QuadraticTestbed::grad_f(const Vector& x) const {
  return a_.transpose() * (a_ * x + b_) / eta_;
}
double QuadraticTestbed::g(const Vector& x) const { return exact_max_w(x)->value; }
Vector QuadraticTestbed::grad_g(const Vector& x) const {
  return c_mat_.transpose() * exact_max_w(x)->maximizer;
}

namespace {

/// Hessian of g on the face of the simplex its maximizer currently lies on.
Matrix hessian_g(const QuadraticTestbed& p, const Vector& x) {
  const Index l = p.c_mat().rows();
  const Vector w = p.exact_max_w(x)->maximizer;
  Matrix face = Matrix::Zero(l, l);
  std::vector<Index> support;
  for (Index i = 0; i < l; ++i)
    if (w[i] > 0.0) support.push_back(i);
  const double inv = 1.0 / static_cast<double>(support.size());
  for (Index i : support)
    for (Index j : support) face(i, j) = (i == j ? 1.0 : 0.0) - inv;
  return p.c_mat().transpose() * face * p.c_mat() / (p.reg() * static_cast<double>(l));
}

/// Damped Newton on f + lambda g (convex, piecewise quadratic).
Vector minimize_lagrangian(const QuadraticTestbed& p, double lambda, Vector x) {
  const Matrix hess_f = p.a().transpose() * p.a() / p.eta();
  auto value = [&](const Vector& z) { return p.f(z) + lambda * p.g(z); };
  auto grad = [&](const Vector& z) -> Vector { return p.grad_f(z) + lambda * p.grad_g(z); };

  constexpr int kMaxIter = 500;
  constexpr double kGradTol = 1e-14;
  for (int it = 0; it < kMaxIter; ++it) {
    const Vector gr = grad(x);
    if (gr.norm() <= kGradTol) break;
    const Matrix h = hess_f + lambda * hessian_g(p, x) +
                     1e-14 * Matrix::Identity(x.size(), x.size());
    Vector step = -h.completeOrthogonalDecomposition().solve(gr);
    if (!step.allFinite() || step.dot(gr) >= 0.0) step = -gr;
    const double base = value(x);
    double t = 1.0;
    Vector next = x + step;
    while (value(next) > base + 1e-4 * t * step.dot(gr) && t > 1e-12) {
      t *= 0.5;
      next = x + t * step;
    }
    if ((next - x).norm() == 0.0) break;
    x = std::move(next);
  }
  return x;
}

}  // namespace

KktPoint solve_testbed_kkt(const QuadraticTestbed& problem) {
  const Vector start = Vector::Zero(problem.dim_x());
  Vector x_lo = minimize_lagrangian(problem, 0.0, start);
  if (problem.g(x_lo) <= 0.0) return {x_lo, 0.0};

  double lo = 0.0;
  double hi = 1.0;
  Vector x_hi = minimize_lagrangian(problem, hi, x_lo);
  for (int i = 0; i < 200 && problem.g(x_hi) > 0.0; ++i) {
    lo = hi;
    x_lo = x_hi;
    hi *= 2.0;
    x_hi = minimize_lagrangian(problem, hi, x_hi);
  }
  if (problem.g(x_hi) > 0.0) throw NumericError("testbed KKT bracket (constraint never satisfied)");

  for (int i = 0; i < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    Vector x_mid = minimize_lagrangian(problem, mid, x_lo);
    if (problem.g(x_mid) > 0.0) {
      lo = mid;
      x_lo = std::move(x_mid);
    } else {
      hi = mid;
      x_hi = std::move(x_mid);
    }
  }
  // An infeasible minimizer of f next to feasible ones: the constraint is not
  // active at the solution.
  if (lo == 0.0) return {x_hi, 0.0};
  return {x_lo, lo};
}

Testbed make_testbed(const TestbedParams& params) {
  if (params.n < 1 || params.m < 1 || params.l < 1)
    throw std::invalid_argument("testbed dimensions must be >= 1");
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.5, 1.5);
  auto gaussian = [&](Index rows, Index cols, double scale) {
    Matrix out(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) out(i, j) = scale * normal(rng);
    return out;
  };

  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(params.n));
  Matrix c_mat = gaussian(params.l, params.n, inv_sqrt_n);
  Vector c(params.l);
  for (Index i = 0; i < params.l; ++i) c[i] = uniform(rng);  // c > 0 keeps x = 0 strictly feasible
  Matrix a = gaussian(params.m, params.n, 0.5 * inv_sqrt_n);
  std::uniform_real_distribution<double> multiplier(0.2, 1.0);
  const double lambda = multiplier(rng);

  // Build the solution first: x* where a random ray from the origin leaves the
  // feasible set, then A and b so that grad f(x*) = -lambda grad g(x*). Both f
  // and g are convex, so this KKT pair is a global solution.
  // Shifting c by a constant shifts g(0) by the same amount, so an instance
  // whose origin is infeasible (possible for r < 0) is repaired in one step.
  constexpr double kOriginMargin = 0.5;
  const double g_origin =
      QuadraticTestbed(a, Vector::Zero(params.m), c_mat, c, params.eta, params.reg, params.r)
          .g(Vector::Zero(params.n));
  int repairs = 0;
  if (g_origin >= 0.0) {
    c.array() += g_origin + kOriginMargin;
    repairs = 1;
  }
  const QuadraticTestbed probe(a, Vector::Zero(params.m), c_mat, c, params.eta, params.reg,
                               params.r);
  constexpr int kMaxDraws = 100;
  constexpr double kMaxRadius = 8.0;
  for (int draw = 1; draw <= kMaxDraws; ++draw) {
    Vector u = gaussian(params.n, 1, 1.0).col(0);
    u.normalize();
    if ((c_mat * u).maxCoeff() <= 1e-3) continue;  // g stays bounded along this ray

    double lo = 0.0, hi = 1.0;
    while (probe.g(hi * u) < 0.0 && hi <= kMaxRadius) hi *= 2.0;
    if (hi > kMaxRadius) continue;  // keep the solution at a moderate distance from x = 0
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (probe.g(mid * u) < 0.0 ? lo : hi) = mid;
    }
    const Vector x_star = hi * u;
    const Vector grad_g = probe.grad_g(x_star);
    if (grad_g.norm() < 1e-8) continue;

    Matrix a_fit = a;
    a_fit.row(0) = 0.5 * grad_g.normalized().transpose();
    const Vector residual =
        a_fit.transpose().completeOrthogonalDecomposition().solve(-params.eta * lambda * grad_g);
    Vector b = residual - a_fit * x_star;

    Testbed out;
    out.problem = std::make_shared<QuadraticTestbed>(a_fit, std::move(b), c_mat, c, params.eta,
                                                     params.reg, params.r);
    out.kkt = {x_star, lambda};
    out.attempts = draw;
    out.c_repairs = repairs;
    return out;
  }
  throw ConfigError("testbed generation found no ray leaving the feasible set");
}

}  // namespace idbpd
