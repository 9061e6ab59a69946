#include "idbpd/direction.hpp"

#include <algorithm>
#include <cmath>

namespace idbpd {

double barrier_rho(const Vector& gpsi) {
  require_finite(gpsi, "constraint gradient");
  return gpsi.norm();
}

double indicator_zeta(double psi_val, const Vector& gpsi) {
  require_finite(psi_val, "constraint value");
  return std::max(psi_val, 0.0) * barrier_rho(gpsi);
}

DirectionResult compute_direction(const Vector& gphi, const Vector& gpsi, double psi_val,
                                  double alpha) {
  if (gphi.size() != gpsi.size())
    throw std::invalid_argument("objective and constraint gradients differ in dimension");
  require_finite(gphi, "objective gradient");
  require_finite(alpha, "alpha");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be nonnegative");

  DirectionResult out;
  out.rho = barrier_rho(gpsi);
  out.zeta = indicator_zeta(psi_val, gpsi);
  out.constraint_active = out.zeta > 0.0;

  if (out.constraint_active) {
    const double rho_sq = gpsi.squaredNorm();
    if (rho_sq == 0.0)
      throw NumericError("squared constraint-gradient norm underflowed with an active gate");
    out.lambda = std::max(-gpsi.dot(gphi) + alpha * out.rho, 0.0) / rho_sq;
  }
  out.d = -gphi - out.lambda * gpsi;
  return out;
}

}  // namespace idbpd
