#include "idbpd/common.hpp"

#include <cmath>

namespace idbpd {

namespace {
std::string describe(const std::string& quantity, long iteration) {
  std::string msg = "non-finite value in " + quantity;
  if (iteration >= 0) msg += " at iteration " + std::to_string(iteration);
  return msg;
}
}  // namespace

NumericError::NumericError(std::string quantity, long iteration)
    : std::runtime_error(describe(quantity, iteration)),
      quantity_(std::move(quantity)),
      iteration_(iteration) {}

void require_finite(double value, std::string_view what, long iteration) {
  if (!std::isfinite(value)) throw NumericError(std::string(what), iteration);
}

void require_finite(const Vector& v, std::string_view what, long iteration) {
  if (!v.allFinite()) throw NumericError(std::string(what), iteration);
}

}  // namespace idbpd
