#pragma once

#include <vector>

#include "idbpd/problem.hpp"
#include "idbpd/solver.hpp"

namespace idbpd {

/// Ascent steps used for evaluation-grade inner solves when a problem has no
/// closed-form maximizer.
inline constexpr int kDefaultEvalSteps = 500;

enum class ImplicitFunction { kObjective, kConstraint };

struct ImplicitEvaluation {
  double value = 0.0;
  Vector grad;
  Vector maximizer;
  /// 0 when the exact callback was used.
  int inner_steps = 0;
};

/// f(x) = max_y phi(x,y) or g(x) = max_w psi(x,w) with its Danskin gradient
/// grad_x h(x, u*). Uses the problem's exact maximizer when available,
/// otherwise eval_steps projected ascent steps from the set center.
ImplicitEvaluation implicit_value_and_grad(const Problem& problem, const Vector& x,
                                           ImplicitFunction which,
                                           int eval_steps = kDefaultEvalSteps);

struct KktReport {
  double stationarity = 0.0;   // ||grad f + lambda grad g||
  double infeasibility = 0.0;  // [g]_+
  double slackness = 0.0;      // |lambda g|
  double f_value = 0.0;
  double g_value = 0.0;
  int eval_inner_steps = 0;

  double max_residual() const;
};

KktReport kkt_residuals(const Problem& problem, const Vector& x, double lambda,
                        int eval_steps = kDefaultEvalSteps);

/// Residuals at every recorded iterate, in trace order.
std::vector<KktReport> evaluate_trace(const IterateTrace& trace, const Problem& problem,
                                      int eval_steps = kDefaultEvalSteps);

struct BestIterate {
  std::size_t index = 0;  // position in trace.entries
  int k = 0;
  KktReport report;
};

/// Recorded iterate minimizing max(stationarity, infeasibility, slackness);
/// ties go to the smaller k.
BestIterate best_iterate(const IterateTrace& trace, const Problem& problem,
                         int eval_steps = kDefaultEvalSteps);

/// Same selection rule over precomputed reports (one per entry).
std::size_t best_index(const std::vector<KktReport>& reports);

}  // namespace idbpd
