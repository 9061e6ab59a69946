#pragma once

#include <optional>

#include "idbpd/common.hpp"

namespace idbpd {

enum class ScheduleMode { kTheory, kPractical };
enum class DualBlock { kY, kW };

/// Per-iteration parameters (alpha_k, gamma, N_k, M_k) over a fixed horizon.
///
/// Theory mode follows the fixed-horizon rates: alpha_k = a*T^{1/3}/(k+2)^{1+omega},
/// gamma = min(c/T^{1/3}, 1/(L_f + L_xy)), N_k = 2/(1-delta_y) log(k+1) and
/// M_k = 1/(1-delta_w) max{max{1, 1/(2 theta)} log T, log(T [psi]_+^{4 theta - 2})}.
/// The existential constants (c, delta_y, delta_w, theta) are exposed as knobs.
///
/// Practical mode: alpha_k = a/(k+2)^{1.001}, a configured gamma, and
/// N_k = base_y*ceil(log(k+2)), M_k = base_w*ceil(log(k+2)).
struct Schedule {
  int horizon = 1;
  ScheduleMode mode = ScheduleMode::kPractical;
  double omega = 0.001;
  double alpha_scale = 1.0;
  double gamma = 5e-4;
  double gamma_c = 1.0;
  double theta = 0.5;
  double delta_y = 0.9;
  double delta_w = 0.9;
  double inner_base_y = 2.0;
  double inner_base_w = 10.0;

  void validate() const;
};

/// Exponent of the practical-mode alpha decay.
inline constexpr double kPracticalAlphaExponent = 1.001;

double alpha_at(const Schedule& s, int k);

/// Primal stepsize. Theory mode needs lip_sum = L_f + L_xy^phi.
double gamma_const(const Schedule& s, std::optional<double> lip_sum);

/// Inner ascent step count, at least 1. Natural logarithms throughout.
int inner_steps(const Schedule& s, int k, DualBlock which,
                std::optional<double> psi_plus = std::nullopt);

}  // namespace idbpd
