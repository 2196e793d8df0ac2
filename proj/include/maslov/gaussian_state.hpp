#pragma once

#include "maslov/polynomial.hpp"
#include "maslov/types.hpp"

namespace maslov {

/// c * exp(i/2 xi^T A xi + i b^T xi)
struct GaussianState {
  CMat A;
  CVec b;
  cplx c{1.0, 0.0};

  int n() const { return static_cast<int>(A.rows()); }
  RMat re_a() const { return A.real(); }
  RMat im_a() const { return A.imag(); }
  cplx evaluate(const RVec& xi) const;
};

/// Validates symmetry of A, Im A > 0 and c != 0.  A is symmetrized.
GaussianState make_gaussian(const CMat& A, const CVec& b, cplx c, double tol = 1e-10);
GaussianState make_gaussian(const CMat& A, cplx c = 1.0, double tol = 1e-10);

/// Polynomial(xi) * Gaussian(xi).
struct QuasiGaussianState {
  GaussianState gaussian;
  Polynomial poly;

  QuasiGaussianState() = default;
  explicit QuasiGaussianState(const GaussianState& g)
      : gaussian(g), poly(Polynomial::constant(g.n(), 1.0)) {}
  QuasiGaussianState(const GaussianState& g, const Polynomial& p) : gaussian(g), poly(p) {
    if (p.nvars() != g.n()) fail_validation("poly_arity", "polynomial arity must equal n");
  }

  int n() const { return gaussian.n(); }
  cplx evaluate(const RVec& xi) const;
};

/// Omega(Y) = P.xi - Q.(1/i)d/dxi acting on the quasi-Gaussian class.
QuasiGaussianState omega_op_apply(const QuasiGaussianState& psi, const CVec& y);

/// exp(i Omega(P,Q)) psi(xi) = exp(i P.xi - i/2 P.Q) psi(xi - Q).  Accepts
/// complex (P,Q); for real X the result is the unitary Weyl shift.
QuasiGaussianState weyl_apply(const QuasiGaussianState& psi, const CVec& x);
inline QuasiGaussianState weyl_apply(const QuasiGaussianState& psi, const RVec& x) {
  return weyl_apply(psi, CVec(x.cast<cplx>()));
}

/// Sum of two quasi-Gaussians sharing A and b.
QuasiGaussianState add_same_core(const QuasiGaussianState& f, const QuasiGaussianState& g,
                                 cplx alpha = 1.0, cplx beta = 1.0);

/// Moves the amplitude into the polynomial so that c == 1.
QuasiGaussianState absorb_amplitude(const QuasiGaussianState& psi);

}  // namespace maslov
