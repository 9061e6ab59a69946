#pragma once

#include <memory>

#include "idbpd/problems/dro_mtl.hpp"
#include "idbpd/problems/testbed.hpp"

namespace fixtures {

inline const idbpd::Testbed& canonical_testbed() {
  static const idbpd::Testbed tb = idbpd::make_testbed(idbpd::TestbedParams{});
  return tb;
}

/// Small DRO-MTL instance: 4 labels over 60 samples, hidden width 3.
inline std::shared_ptr<idbpd::DroMtlProblem> small_dro(double r = 0.5, std::uint64_t seed = 3) {
  idbpd::BlobParams p;
  p.seed = seed;
  p.samples = 60;
  p.features = 4;
  p.labels = 4;
  return idbpd::make_dro_mtl(idbpd::make_blobs(p), 3, 1e-3, r);
}

/// Minimal problem with user-supplied closures; Y and W are simplices of the
/// given dimensions unless replaced.
class LambdaProblem final : public idbpd::Problem {
 public:
  using Scalar2 = std::function<double(const idbpd::Vector&, const idbpd::Vector&)>;
  using Vector2 = std::function<idbpd::Vector(const idbpd::Vector&, const idbpd::Vector&)>;

  LambdaProblem(idbpd::Index n, idbpd::FeasibleSet y, idbpd::FeasibleSet w)
      : n_(n), y_(std::move(y)), w_(std::move(w)) {}

  Scalar2 phi_fn, psi_fn;
  Vector2 gxphi, gyphi, gxpsi, gwpsi;
  idbpd::Smoothness constants;

  idbpd::Index dim_x() const override { return n_; }
  const idbpd::FeasibleSet& set_y() const override { return y_; }
  const idbpd::FeasibleSet& set_w() const override { return w_; }
  double phi(const idbpd::Vector& x, const idbpd::Vector& y) const override { return phi_fn(x, y); }
  idbpd::Vector grad_x_phi(const idbpd::Vector& x, const idbpd::Vector& y) const override {
    return gxphi(x, y);
  }
  idbpd::Vector grad_y_phi(const idbpd::Vector& x, const idbpd::Vector& y) const override {
    return gyphi(x, y);
  }
  double psi(const idbpd::Vector& x, const idbpd::Vector& w) const override { return psi_fn(x, w); }
  idbpd::Vector grad_x_psi(const idbpd::Vector& x, const idbpd::Vector& w) const override {
    return gxpsi(x, w);
  }
  idbpd::Vector grad_w_psi(const idbpd::Vector& x, const idbpd::Vector& w) const override {
    return gwpsi(x, w);
  }
  idbpd::Smoothness smoothness() const override { return constants; }

 private:
  idbpd::Index n_;
  idbpd::FeasibleSet y_, w_;
};

/// phi(x,y) = 0.5||x - a||^2 (y ignored), psi(x,w) = w'(Cx - c) on a simplex,
/// i.e. the constraint max_j (C_j x - c_j) <= 0. Both blocks are one-dimensional
/// whole spaces / simplices so exact maxima are trivial.
inline std::shared_ptr<LambdaProblem> projection_problem(const idbpd::Vector& a,
                                                         const idbpd::Vector& normal, double offset) {
  using idbpd::Vector;
  const auto n = a.size();
  auto p = std::make_shared<LambdaProblem>(n, idbpd::FeasibleSet::whole_space(1),
                                           idbpd::FeasibleSet::simplex(1));
  p->phi_fn = [a](const Vector& x, const Vector&) { return 0.5 * (x - a).squaredNorm(); };
  p->gxphi = [a](const Vector& x, const Vector&) -> Vector { return x - a; };
  p->gyphi = [](const Vector&, const Vector&) -> Vector { return Vector::Zero(1); };
  p->psi_fn = [normal, offset](const Vector& x, const Vector& w) { return w[0] * (normal.dot(x) - offset); };
  p->gxpsi = [normal](const Vector&, const Vector& w) -> Vector { return w[0] * normal; };
  p->gwpsi = [normal, offset](const Vector& x, const Vector&) -> Vector {
    return Vector::Constant(1, normal.dot(x) - offset);
  };
  return p;
}

/// Forwards every oracle but hides the exact maximizers, forcing iterative
/// inner solves.
class HideExact final : public idbpd::Problem {
 public:
  explicit HideExact(const idbpd::Problem& inner) : inner_(inner) {}
  idbpd::Index dim_x() const override { return inner_.dim_x(); }
  const idbpd::FeasibleSet& set_y() const override { return inner_.set_y(); }
  const idbpd::FeasibleSet& set_w() const override { return inner_.set_w(); }
  double phi(const idbpd::Vector& x, const idbpd::Vector& y) const override { return inner_.phi(x, y); }
  idbpd::Vector grad_x_phi(const idbpd::Vector& x, const idbpd::Vector& y) const override {
    return inner_.grad_x_phi(x, y);
  }
  idbpd::Vector grad_y_phi(const idbpd::Vector& x, const idbpd::Vector& y) const override {
    return inner_.grad_y_phi(x, y);
  }
  double psi(const idbpd::Vector& x, const idbpd::Vector& w) const override { return inner_.psi(x, w); }
  idbpd::Vector grad_x_psi(const idbpd::Vector& x, const idbpd::Vector& w) const override {
    return inner_.grad_x_psi(x, w);
  }
  idbpd::Vector grad_w_psi(const idbpd::Vector& x, const idbpd::Vector& w) const override {
    return inner_.grad_w_psi(x, w);
  }
  idbpd::Smoothness smoothness() const override { return inner_.smoothness(); }

 private:
  const idbpd::Problem& inner_;
};

}  // namespace fixtures
