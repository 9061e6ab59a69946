#include "idbpd/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "idbpd/common.hpp"

namespace idbpd {

void Schedule::validate() const {
  if (horizon < 1) throw ConfigError("schedule horizon must be >= 1");
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ConfigError("omega must be > 0");
  if (!(alpha_scale > 0.0) || !std::isfinite(alpha_scale))
    throw ConfigError("alpha scale must be > 0");
  // gamma = 0 is accepted as a degenerate frozen-x run.
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(gamma_c > 0.0) || !std::isfinite(gamma_c)) throw ConfigError("gamma_c must be > 0");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (!(delta_y > 0.0 && delta_y < 1.0) || !(delta_w > 0.0 && delta_w < 1.0))
    throw ConfigError("delta_y and delta_w must lie in (0, 1)");
  if (!(inner_base_y > 0.0) || !(inner_base_w > 0.0))
    throw ConfigError("inner step bases must be > 0");
}

double alpha_at(const Schedule& s, int k) {
  if (k < 0 || k >= s.horizon)
    throw std::out_of_range("alpha_at: k=" + std::to_string(k) + " outside [0, " +
                            std::to_string(s.horizon) + ")");
  const double shifted = static_cast<double>(k) + 2.0;
  if (s.mode == ScheduleMode::kTheory)
    return s.alpha_scale * std::cbrt(static_cast<double>(s.horizon)) /
           std::pow(shifted, 1.0 + s.omega);
  return s.alpha_scale / std::pow(shifted, kPracticalAlphaExponent);
}

double gamma_const(const Schedule& s, std::optional<double> lip_sum) {
  if (s.mode == ScheduleMode::kPractical) return s.gamma;
  if (!lip_sum || !(*lip_sum > 0.0))
    throw ConfigError("theory-mode gamma needs L_f + L_xy^phi > 0; use practical mode");
  return std::min(s.gamma_c / std::cbrt(static_cast<double>(s.horizon)), 1.0 / *lip_sum);
}

namespace {
int to_count(double raw) {
  if (!std::isfinite(raw) || raw < 1.0) return 1;
  constexpr double kCap = 1e6;
  return static_cast<int>(std::ceil(std::min(raw, kCap)));
}
}  // namespace

int inner_steps(const Schedule& s, int k, DualBlock which, std::optional<double> psi_plus) {
  if (k < 0) throw std::out_of_range("inner_steps: negative k");
  if (s.mode == ScheduleMode::kPractical) {
    const double base = which == DualBlock::kY ? s.inner_base_y : s.inner_base_w;
    return to_count(base * std::ceil(std::log(static_cast<double>(k) + 2.0)));
  }
  if (which == DualBlock::kY)
    return to_count(2.0 / (1.0 - s.delta_y) * std::log(static_cast<double>(k) + 1.0));

  const double log_t = std::log(static_cast<double>(s.horizon));
  double branch = std::max(1.0, 1.0 / (2.0 * s.theta)) * log_t;
  if (psi_plus && *psi_plus > 0.0) {
    // log(T [psi]_+^{4 theta - 2}); may be negative, in which case the other
    // branch wins the max.
    const double alt = log_t + (4.0 * s.theta - 2.0) * std::log(*psi_plus);
    if (std::isfinite(alt)) branch = std::max(branch, alt);
  }
  return to_count(branch / (1.0 - s.delta_w));
}

}  // namespace idbpd
