#pragma once

#include "maslov/gaussian_state.hpp"
#include "maslov/germ.hpp"
#include "maslov/symplectic.hpp"

namespace maslov {

/// H = 1/2 sum Gamma_ij Omega(e_i) Omega(e_j) + epsilon, symmetric ordering.
struct QuadraticHamiltonian {
  RMat gamma;
  double epsilon = 0.0;
  int n() const { return static_cast<int>(gamma.rows() / 2); }
};

QuadraticHamiltonian make_hamiltonian(const RMat& gamma, double epsilon = 0.0, double tol = 1e-12);

/// Quotient L^{perp omega} / L represented by a Darboux basis U of
/// (L + G)^{perp omega}, with U^T J U = J.
struct ReducedSpace {
  ConstraintPlane plane;
  GaugeSurface gauge;
  RMat U;      // 2n x 2m
  RMat frame;  // [X, Y, U], 2n x 2n
  int m() const { return static_cast<int>(U.cols() / 2); }
};

ReducedSpace make_reduced_space(const ConstraintPlane& L);
ReducedSpace make_reduced_space(const ConstraintPlane& L, const GaugeSurface& G);

/// Quotient coordinates of a representative in L^{perp omega}.
CVec to_quotient(const ReducedSpace& R, const CVec& y);

struct CompatibilityReport {
  bool compatible = false;
  double gg_residual = 0.0;  // gauge-gauge block of the coefficients
  double gu_residual = 0.0;  // gauge-quotient block
  double tol = 0.0;
};

CompatibilityReport check_compatibility(const QuadraticHamiltonian& H, const ReducedSpace& R,
                                        double tol = 1e-9);
inline bool check_compatibility(const QuadraticHamiltonian& H, const ConstraintPlane& L,
                                double tol = 1e-9) {
  return check_compatibility(H, make_reduced_space(L), tol).compatible;
}

struct Reduction {
  ReducedSpace space;
  RMat gamma_tilde;  // coefficients in the frame [X, Y, U]
  RMat gamma_prime;  // 2n x 2n, supported on U
  cplx epsilon_prime;
  RMat gamma_bar;    // 2m x 2m
};

/// Drops the constraint terms.  epsilon' picks up i/2 tr of the
/// constraint-gauge block, which is complex when that block is nonzero.
Reduction reduce_hamiltonian(const QuadraticHamiltonian& H, const ConstraintPlane& L,
                             double tol = 1e-9);

/// Matrix of Y -> Y o Gamma = Gamma J^T Y in (P, Q) coordinates.
RMat circ_generator(const RMat& gamma);
CVec circ_product(const CVec& y, const RMat& gamma_bar);

struct FlowMap {
  double t = 0.0;
  RMat u;
};

FlowMap classical_flow(const RMat& gamma_bar, double t);

/// Hpsi with H applied exactly on the quasi-Gaussian class.
QuasiGaussianState apply_hamiltonian(const RMat& gamma, cplx epsilon, const QuasiGaussianState& psi);

struct EvolutionResult {
  GaussianState state;           // A(t) from the transported H-germ (b = 0) or the representative
  GaussianState representative;  // full-space evolution under the reduced Hamiltonian
  CMat germ;                     // u_t applied to the initial H-germ
  double germ_distance = 0.0;    // span distance between germ and h_germ(state.A)
  int substeps = 0;              // branch-tracking samples actually used
};

EvolutionResult evolve_gaussian_full(const GaussianState& psi, const QuadraticHamiltonian& H,
                                     const ConstraintPlane& L, double t, int steps = 64);
GaussianState evolve_gaussian(const GaussianState& psi, const QuadraticHamiltonian& H,
                              const ConstraintPlane& L, double t, int steps = 64);

/// Pol(Omega(e_P)) phi evolves to Pol(Omega(u_t e_P)) phi(t); exact on the
/// class.  Returns the full-space representative.
QuasiGaussianState evolve_quasi_gaussian(const QuasiGaussianState& psi, const QuadraticHamiltonian& H,
                                         const ConstraintPlane& L, double t, int steps = 64);

}  // namespace maslov
