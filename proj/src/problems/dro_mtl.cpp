#include "idbpd/problems/dro_mtl.hpp"

#include <cmath>

#include "idbpd/projection.hpp"
#include "idbpd/solver.hpp"

namespace idbpd {

DroMtlProblem::DroMtlProblem(DatasetSplit split, Index hidden, double lambda_reg, double r)
    : split_(std::move(split)),
      layout_(layout_for(split_, hidden)),
      lambda_reg_(lambda_reg),
      r_(r),
      set_y_(FeasibleSet::simplex(std::max<Index>(split_.task1.size(), 1))),
      set_w_(FeasibleSet::simplex(std::max<Index>(split_.task2.size(), 1))) {
  split_.validate();
  if (!(lambda_reg_ > 0.0) || !std::isfinite(lambda_reg_))
    throw ConfigError("DRO regularization must be > 0");
  if (!std::isfinite(r_)) throw ConfigError("constraint threshold r must be finite");
}

Vector DroMtlProblem::task_losses(const Vector& x, Task task) const {
  return mlp_loss_and_grads(x, layout_, task == Task::kFirst ? split_.task1 : split_.task2, task).losses();
}

double DroMtlProblem::regularizer(const Vector& u) const {
  const double n = static_cast<double>(u.size());
  return 0.5 * lambda_reg_ * n * (u.array() - 1.0 / n).matrix().squaredNorm();
}

double DroMtlProblem::regularized_value(const Vector& losses, const Vector& u) const {
  return u.dot(losses) - regularizer(u);
}

Vector DroMtlProblem::regularized_grad(const Vector& losses, const Vector& u) const {
  const double n = static_cast<double>(u.size());
  return losses - lambda_reg_ * n * (u.array() - 1.0 / n).matrix();
}

double DroMtlProblem::phi(const Vector& x, const Vector& y) const {
  return regularized_value(task_losses(x, Task::kFirst), y);
}

Vector DroMtlProblem::grad_x_phi(const Vector& x, const Vector& y) const {
  return mlp_loss_and_grads(x, layout_, split_.task1, Task::kFirst).weighted_gradient(y);
}

Vector DroMtlProblem::grad_y_phi(const Vector& x, const Vector& y) const {
  return regularized_grad(task_losses(x, Task::kFirst), y);
}

double DroMtlProblem::psi(const Vector& x, const Vector& w) const {
  return regularized_value(task_losses(x, Task::kSecond), w) - r_;
}

Vector DroMtlProblem::grad_x_psi(const Vector& x, const Vector& w) const {
  return mlp_loss_and_grads(x, layout_, split_.task2, Task::kSecond).weighted_gradient(w);
}

Vector DroMtlProblem::grad_w_psi(const Vector& x, const Vector& w) const {
  return regularized_grad(task_losses(x, Task::kSecond), w);
}

Smoothness DroMtlProblem::smoothness() const {
  // Only the dual-block curvatures are known; network constants are not.
  Smoothness s;
  const double n = static_cast<double>(split_.task1.size());
  const double m = static_cast<double>(split_.task2.size());
  s.lyy_phi = lambda_reg_ * n;
  s.iota_phi = lambda_reg_ * n;
  s.lww_psi = lambda_reg_ * m;
  s.iota_psi = lambda_reg_ * m;
  return s;
}

std::optional<InnerMax> DroMtlProblem::exact_max_y(const Vector& x) const {
  return closed_form_regularized_simplex_max(task_losses(x, Task::kFirst), lambda_reg_);
}

std::optional<InnerMax> DroMtlProblem::exact_max_w(const Vector& x) const {
  InnerMax out = closed_form_regularized_simplex_max(task_losses(x, Task::kSecond), lambda_reg_);
  out.value -= r_;
  return out;
}

RestrictedObjective DroMtlProblem::restrict_y(const Vector& x) const {
  auto losses = std::make_shared<const Vector>(task_losses(x, Task::kFirst));
  return {[this, losses](const Vector& y) { return regularized_value(*losses, y); },
          [this, losses](const Vector& y) { return regularized_grad(*losses, y); }};
}

RestrictedObjective DroMtlProblem::restrict_w(const Vector& x) const {
  auto losses = std::make_shared<const Vector>(task_losses(x, Task::kSecond));
  return {[this, losses](const Vector& w) { return regularized_value(*losses, w) - r_; },
          [this, losses](const Vector& w) { return regularized_grad(*losses, w); }};
}

std::shared_ptr<DroMtlProblem> make_dro_mtl(DatasetSplit split, Index hidden, double lambda_reg,
                                            double r) {
  if (split.task1.size() < 1 || split.task2.size() < 1)
    throw ConfigError("both tasks need at least one sample");
  return std::make_shared<DroMtlProblem>(std::move(split), hidden, lambda_reg, r);
}

namespace {

/// The task-2 robust loss as an objective, with a constraint that never binds
/// (psi = -1), so the primal-dual iteration reduces to descent-ascent with a
/// zero multiplier.
class RobustTaskObjective final : public Problem {
 public:
  explicit RobustTaskObjective(const DroMtlProblem& base)
      : base_(base), never_(FeasibleSet::simplex(1)) {}

  Index dim_x() const override { return base_.dim_x(); }
  const FeasibleSet& set_y() const override { return base_.set_w(); }
  const FeasibleSet& set_w() const override { return never_; }

  double phi(const Vector& x, const Vector& y) const override { return base_.psi(x, y) + base_.r(); }
  Vector grad_x_phi(const Vector& x, const Vector& y) const override { return base_.grad_x_psi(x, y); }
  Vector grad_y_phi(const Vector& x, const Vector& y) const override { return base_.grad_w_psi(x, y); }
  double psi(const Vector&, const Vector&) const override { return -1.0; }
  Vector grad_x_psi(const Vector&, const Vector&) const override { return Vector::Zero(dim_x()); }
  Vector grad_w_psi(const Vector&, const Vector&) const override { return Vector::Zero(1); }

  Smoothness smoothness() const override {
    const Smoothness b = base_.smoothness();
    Smoothness s;
    s.lyy_phi = b.lww_psi;
    s.iota_phi = b.iota_psi;
    s.lww_psi = 1.0;
    return s;
  }
  std::optional<InnerMax> exact_max_y(const Vector& x) const override {
    auto m = base_.exact_max_w(x);
    m->value += base_.r();
    return m;
  }
  RestrictedObjective restrict_y(const Vector& x) const override {
    auto h = base_.restrict_w(x);
    const double shift = base_.r();
    return {[v = std::move(h.value), shift](const Vector& u) { return v(u) + shift; }, std::move(h.grad)};
  }

 private:
  const DroMtlProblem& base_;
  FeasibleSet never_;
};

}  // namespace

double calibrate_threshold(const DatasetSplit& split, Index hidden, double lambda_reg,
                           int budget_iters, const CalibrationOptions& options) {
  if (budget_iters < 1) throw ConfigError("calibration budget must be >= 1 iteration");
  const DroMtlProblem base(split, hidden, lambda_reg, 0.0);
  const RobustTaskObjective objective(base);

  SolverConfig config;
  config.schedule.horizon = budget_iters;
  config.schedule.mode = ScheduleMode::kPractical;
  config.schedule.gamma = options.gamma;
  config.schedule.inner_base_y = options.inner_base;
  config.x0 = mlp_initial_weights(base.layout(), options.init_seed);
  config.record_stride = budget_iters;

  const IterateTrace trace = solve(objective, config);
  const double value = objective.exact_max_y(trace.final_entry().x)->value;
  require_finite(value, "calibrated threshold");
  return value;
}

}  // namespace idbpd
