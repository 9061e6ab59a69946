#pragma once

#include "idbpd/common.hpp"

namespace idbpd {

/// Closed-form solution of min_d ||d + gphi||^2 s.t. gpsi'd + alpha*||gpsi|| <= 0,
/// with the multiplier gated to zero when the constraint estimate is inactive.
struct DirectionResult {
  Vector d;
  double lambda = 0.0;
  double zeta = 0.0;
  double rho = 0.0;
  bool constraint_active = false;
};

/// Dynamic barrier: ||grad_x psi||.
double barrier_rho(const Vector& gpsi);

/// Gate value [psi]_+ * ||grad_x psi||; zero exactly at estimated-feasible points.
double indicator_zeta(double psi_val, const Vector& gpsi);

DirectionResult compute_direction(const Vector& gphi, const Vector& gpsi, double psi_val,
                                  double alpha);

}  // namespace idbpd
