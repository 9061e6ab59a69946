#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace idbpd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

using ScalarField = std::function<double(const Vector&)>;
using VectorField = std::function<Vector(const Vector&)>;

/// Raised when an oracle or an iterate produces NaN/Inf. `iteration` is -1
/// when the failure happened outside an iterative loop.
class NumericError : public std::runtime_error {
 public:
  NumericError(std::string quantity, long iteration = -1);

  const std::string& quantity() const { return quantity_; }
  long iteration() const { return iteration_; }

 private:
  std::string quantity_;
  long iteration_;
};

/// Invalid configuration or dimension mismatch between config and problem.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

void require_finite(double value, std::string_view what, long iteration = -1);
void require_finite(const Vector& v, std::string_view what, long iteration = -1);

}  // namespace idbpd
