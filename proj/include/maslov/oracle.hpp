#pragma once

#include <vector>

#include "maslov/dynamics.hpp"
#include "maslov/gaussian_state.hpp"
#include "maslov/quadrature.hpp"
#include "maslov/symplectic.hpp"

namespace maslov {

/// Brute-force quadrature settings.  Node counts and trapezoid densities
/// are doubled together until two successive values agree.  Quasi-Gaussian
/// products use Gauss-Hermite over the shifts as well; the trapezoid
/// lattice serves oscillator-basis states.
struct GridSpec {
  int nodes = 16;              // Gauss-Hermite nodes per axis, at least 16
  double shift_density = 1.2;  // trapezoid points per envelope width over the shifts
  double shift_extent = 8.0;   // half-width in envelope widths, widened on demand
  double rel_target = 1e-8;
  int max_doublings = 4;
  SumMode mode = SumMode::Parallel;
};

struct OracleValue {
  cplx value;
  double error = 0.0;  // difference between the last two refinement levels
  int doublings = 0;
  double extent = 0.0;  // final shift half-width in envelope widths
};

/// <f, g> over L by tensor Gauss-Hermite quadrature over xi and the shift
/// parameters, antilinear in f.  n <= 3 and k <= 2.
OracleValue numeric_inner_product(const QuasiGaussianState& f, const QuasiGaussianState& g,
                                  const ConstraintPlane& L, const GridSpec& grid = {});

struct DiracSamples {
  std::vector<RVec> points;
  std::vector<cplx> values;
  double error = 0.0;  // largest refinement difference over the samples
};

/// psi_D(xi) = int dmu(X) (exp(i Omega(X)) psi)(xi) at the given points.
/// Needs X -> X_Q injective on L.
DiracSamples numeric_dirac_project(const GaussianState& psi, const ConstraintPlane& L,
                                   const std::vector<RVec>& points, const GridSpec& grid = {});

/// int dmu(X) int dsigma(Y) rho(Y) exp(i omega(X, Y)) / rho(0) with
/// rho(Y) = exp(-1/2 y^T precision y).  An empty precision means identity.
OracleValue numeric_pairing_constant(const ConstraintPlane& L, const GaugeSurface& G,
                                     const RMat& precision = RMat(), const GridSpec& grid = {});

struct TruncationSpec {
  int n_max = 24;  // highest level per mode, at least 8
  RVec omega;      // reference frequency per mode; empty means all ones
  double rel_target = 1e-8;
  int max_doublings = 3;
  bool reduce = true;  // evolve with the reduced generator and epsilon'
};

/// Coefficients in the product basis of oscillator eigenfunctions with
/// frequencies omega; level (a_1, ..., a_n) sits at sum_j a_j (n_max+1)^j.
struct BasisState {
  int n = 0;
  int n_max = 0;
  RVec omega;
  CVec coeffs;

  cplx evaluate(const RVec& xi) const;
  double norm() const { return coeffs.norm(); }
};

/// L^2 projection onto the levels a_j <= n_max.  nodes = 0 picks n_max + 40.
BasisState project_to_basis(const QuasiGaussianState& psi, int n_max, const RVec& omega, int nodes = 0);

/// Re-expresses a state with a larger cutoff (zero padding).
BasisState pad_basis(const BasisState& s, int n_max);

struct BasisEvolution {
  BasisState state;
  double error = 0.0;  // relative coefficient change at the last doubling
  int n_max = 0;
  int steps = 0;       // Taylor steps at the final cutoff
};

/// exp(-i t (Omega_2(Gamma') + epsilon')) psi in a truncated oscillator
/// basis.  n <= 2.
BasisEvolution numeric_evolve(const QuasiGaussianState& psi, const QuadraticHamiltonian& H,
                              const ConstraintPlane& L, double t, const TruncationSpec& trunc = {});

/// Constrained product of two basis states by the same shift quadrature.
OracleValue numeric_inner_product(const BasisState& f, const BasisState& g, const ConstraintPlane& L,
                                  const GridSpec& grid = {});

}  // namespace maslov
