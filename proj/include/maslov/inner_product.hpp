#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "maslov/gaussian_state.hpp"
#include "maslov/germ.hpp"
#include "maslov/symplectic.hpp"

namespace maslov {

/// <f, g> = int_L dmu(X) (f, exp(i Omega(X)) g), antilinear in f.
cplx gaussian_inner_product(const QuasiGaussianState& f, const QuasiGaussianState& g,
                            const ConstraintPlane& L);
inline cplx gaussian_inner_product(const GaussianState& f, const GaussianState& g,
                                   const ConstraintPlane& L) {
  return gaussian_inner_product(QuasiGaussianState(f), QuasiGaussianState(g), L);
}

/// || sum_i a_i psi_i ||^2 in the constrained product.
cplx combination_norm(const std::vector<std::pair<cplx, QuasiGaussianState>>& terms,
                      const ConstraintPlane& L);

struct NormReport {
  double closed_form = 0.0;     // product formula with the (2 pi)^{(n+k)/2} prefactor
  double inner_product = 0.0;   // gaussian_inner_product(psi, psi)
  double delta_c = 1.0;         // det(2 Im A)^{-1/2}
  double delta_p_minus = 1.0;
  int two_pi_power_twice = 0;   // exponent of 2 pi, doubled (n + k)
  double rel_diff = 0.0;
};

/// Closed-form norm from the germ data, cross-checked against the direct
/// inner product.  Throws a numerical error when the two disagree.
NormReport gaussian_norm_closed_form(const GaussianState& psi, const ConstraintPlane& L,
                                     double tol = 1e-9);

struct EquivalenceResult {
  cplx c;
  double residual = 0.0;  // |<f - c g, f - c g>|
};

/// c with f ~ c g when the H-germs agree; nullopt otherwise.
std::optional<EquivalenceResult> gaussian_equivalent(const GaussianState& f, const GaussianState& g,
                                                     const ConstraintPlane& L,
                                                     double germ_tol = 1e-8);

/// Same class modulo null states: the polynomial is divided by the
/// constraint forms (X_P - A X_Q) . xi until no constraint coordinate is
/// left.  Norms of null-dominated states keep full relative precision.
QuasiGaussianState reduce_modulo_null(const QuasiGaussianState& psi, const ConstraintPlane& L);

/// |<f - c g, f - c g>|, the squared constrained norm of the difference.
double equivalence_residual(const GaussianState& f, const GaussianState& g, cplx c,
                            const ConstraintPlane& L);

/// c_D * exp(i/2 eta^T A_D eta + i b_D^T eta) * delta^d(F_d^T xi), eta = F_s^T xi.
struct DiracGaussian {
  int n = 0;
  RMat support;           // F_s, n x (n - d), orthonormal
  RMat delta_directions;  // F_d, n x d, orthonormal
  CMat A;                 // on the support coordinates
  CVec b;
  cplx c{1.0, 0.0};
  // Regular case: distance between the germ formula and the direct integral.
  double route_mismatch = 0.0;
  bool regular = true;

  /// Value of the regular factor at xi (the delta factor is not evaluated).
  cplx regular_value(const RVec& xi) const;
};

DiracGaussian dirac_project(const GaussianState& psi, const ConstraintPlane& L,
                            const GaugeSurface& G);

/// rho(Y) = rho0 * exp(-1/2 y^T precision y), Y = sum y_b Y_b.
struct GaugeWeight {
  RMat precision;
  double rho0 = 0.0;
};

/// Unit-covariance profile with rho(0) = 1 / Delta.
GaugeWeight default_gauge_weight(const ConstraintPlane& L, const GaugeSurface& G);

struct DiracNormReport {
  double value = 0.0;
  double imag_residual = 0.0;
  bool rho_normalized = true;
};

DiracNormReport dirac_inner_product(const DiracGaussian& psi, const ConstraintPlane& L,
                                    const GaugeSurface& G,
                                    const std::optional<GaugeWeight>& rho = std::nullopt);

}  // namespace maslov
