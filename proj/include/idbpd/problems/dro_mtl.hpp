#pragma once

#include <memory>

#include "idbpd/problem.hpp"
#include "idbpd/problems/dataset.hpp"
#include "idbpd/problems/mlp.hpp"
#include "idbpd/schedule.hpp"

namespace idbpd {

/// Regularization of the worst-case sample weights used in all experiments.
inline constexpr double kDefaultDroRegularization = 1e-3;

/// Distributionally robust two-task learning with a task-priority constraint:
///   phi(x,y) = sum_i y_i l1(x, xi_i) - (lam n/2)||y - 1/n||^2,   y in simplex(n)
///   psi(x,w) = sum_j w_j l2(x, xi_j) - (lam m/2)||w - 1/m||^2 - r,  w in simplex(m)
/// with l1, l2 the cross-entropy losses of the two heads of a shared MLP.
class DroMtlProblem final : public Problem {
 public:
  DroMtlProblem(DatasetSplit split, Index hidden, double lambda_reg, double r);

  Index dim_x() const override { return layout_.size(); }
  const FeasibleSet& set_y() const override { return set_y_; }
  const FeasibleSet& set_w() const override { return set_w_; }

  double phi(const Vector& x, const Vector& y) const override;
  Vector grad_x_phi(const Vector& x, const Vector& y) const override;
  Vector grad_y_phi(const Vector& x, const Vector& y) const override;
  double psi(const Vector& x, const Vector& w) const override;
  Vector grad_x_psi(const Vector& x, const Vector& w) const override;
  Vector grad_w_psi(const Vector& x, const Vector& w) const override;

  Smoothness smoothness() const override;
  std::optional<InnerMax> exact_max_y(const Vector& x) const override;
  std::optional<InnerMax> exact_max_w(const Vector& x) const override;
  RestrictedObjective restrict_y(const Vector& x) const override;
  RestrictedObjective restrict_w(const Vector& x) const override;

  Vector task_losses(const Vector& x, Task task) const;
  const MlpLayout& layout() const { return layout_; }
  const DatasetSplit& split() const { return split_; }
  double lambda_reg() const { return lambda_reg_; }
  double r() const { return r_; }

 private:
  double regularizer(const Vector& u) const;
  double regularized_value(const Vector& losses, const Vector& u) const;
  Vector regularized_grad(const Vector& losses, const Vector& u) const;

  DatasetSplit split_;
  MlpLayout layout_;
  double lambda_reg_;
  double r_;
  FeasibleSet set_y_, set_w_;
};

std::shared_ptr<DroMtlProblem> make_dro_mtl(DatasetSplit split, Index hidden,
                                            double lambda_reg = kDefaultDroRegularization,
                                            double r = 0.0);

struct CalibrationOptions {
  double gamma = 0.05;
  std::uint64_t init_seed = 1;
  double inner_base = 10.0;
};

/// Threshold r for the task-2 constraint: minimizes the robust task-2 loss
/// max_w sum_j w_j l2 - g_m(w) alone for budget_iters iterations of the
/// unconstrained (multiplier fixed at zero) primal-dual iteration, starting
/// from mlp_initial_weights(layout, init_seed), and returns the final robust
/// loss.
double calibrate_threshold(const DatasetSplit& split, Index hidden, double lambda_reg,
                           int budget_iters, const CalibrationOptions& options = {});

}  // namespace idbpd
