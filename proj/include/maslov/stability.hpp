#pragma once

#include <string>
#include <vector>

#include "maslov/dynamics.hpp"
#include "maslov/gaussian_state.hpp"
#include "maslov/germ.hpp"

namespace maslov {

struct StabilityReport {
  bool stable = false;
  bool diagonalizable = false;
  bool zero_mode = false;
  std::vector<cplx> spectrum;   // eigenvalues of the flow generator on the quotient
  std::vector<cplx> offending;  // off the imaginary axis or in a Jordan block
  std::string reason;
};

/// Stability of dY/dt = Y o Gamma_bar on the quotient.
StabilityReport analyze_stability(const RMat& gamma_bar, double tol = 1e-6);

/// Thrown by ground_state on an unstable reduced system.
class UnstableError : public Error {
 public:
  explicit UnstableError(StabilityReport report)
      : Error(ErrorKind::Validation, "unstable", "reduced classical system is unstable: " + report.reason),
        report_(std::move(report)) {}
  const StabilityReport& report() const noexcept { return report_; }

 private:
  StabilityReport report_;
};

/// Y_I(t) = Y_I exp(i beta_I t), normalized so that (1/i) omega(Y_I, Y_J*) = delta_IJ
/// and omega(Y_I, Y_J) = 0.  A frequency is negative when its mode has
/// negative Krein signature and was replaced by the conjugate.
struct ModeSet {
  RVec beta;
  CMat quotient;  // 2m x m
  CMat modes;     // 2n x m, representatives U * quotient
};

ModeSet extract_modes(const RMat& gamma_bar, const ReducedSpace& R, double tol = 1e-6);

/// span{Y_1, ..., Y_m, L^C}; throws when the germ checks fail.
ComplexGerm germ_from_modes(const ModeSet& modes, const ConstraintPlane& L);

struct GroundState {
  GaussianState state;  // normalized in the constrained product
  cplx energy;
  ModeSet modes;
  Reduction reduction;
  double residual = 0.0;
};

GroundState ground_state(const QuadraticHamiltonian& H, const ConstraintPlane& L, double tol = 1e-8);

struct ExcitedState {
  QuasiGaussianState state;
  cplx energy;
  std::vector<int> occupation;
};

/// prod_I Omega(conj Y_I)^{N_I} applied to the ground state.
ExcitedState excited_state(const GroundState& ground, const std::vector<int>& occupation);

/// <r, r>^{1/2} for r = H psi - E psi.
double verify_eigen(const QuadraticHamiltonian& H, const ConstraintPlane& L, const QuasiGaussianState& psi,
                    cplx energy);

struct SpectrumLevel {
  std::vector<int> occupation;
  cplx energy;
};

/// Levels with Re E <= bound in order of increasing Re E.  Needs every
/// frequency positive.
std::vector<SpectrumLevel> spectrum_below(const GroundState& ground, double bound,
                                          std::size_t max_levels = 10000);

}  // namespace maslov
