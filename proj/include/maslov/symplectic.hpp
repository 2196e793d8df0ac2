#pragma once

#include "maslov/types.hpp"

namespace maslov {

/// A point of R^{2n} or C^{2n} is a plain Eigen vector in (P_1..P_n,
/// Q_1..Q_n) block order.  Subspaces are column-stacked bases.
using PhaseVector = RVec;
using ComplexPhaseVector = CVec;

inline int half_dim(Eigen::Index len) {
  if (len % 2 != 0) fail_validation("odd_dimension", "phase vectors must have even length");
  return static_cast<int>(len / 2);
}

double symplectic_form(const RVec& x, const RVec& y);
cplx symplectic_form(const CVec& x, const CVec& y);

/// Matrix of omega(a_i, b_j) for column bases a, b.
RMat omega_gram(const RMat& a, const RMat& b);
CMat omega_gram(const CMat& a, const CMat& b);

bool is_isotropic(const RMat& basis, double tol = 1e-10);
bool is_isotropic(const CMat& basis, double tol = 1e-10);

/// Orthonormal basis of {Y : omega(Y, s) = 0}.  Over C the form is the
/// bilinear extension (no conjugation).
RMat skew_complement(const RMat& basis);
CMat skew_complement(const CMat& basis);

/// Isotropic constraint plane.  `basis` is Euclidean-orthonormal and
/// `measure_scale` is the density of the invariant measure in the
/// coordinates of that basis.
class ConstraintPlane {
 public:
  ConstraintPlane() = default;
  /// Validates isotropy and independence, orthonormalizes, and rescales the
  /// measure so that dmu is unchanged.
  ConstraintPlane(int n, const RMat& basis, double measure_scale = 1.0, double tol = 1e-10);

  int n() const { return n_; }
  int k() const { return static_cast<int>(basis_.cols()); }
  const RMat& basis() const { return basis_; }
  double measure_scale() const { return scale_; }

  RMat p_block() const { return basis_.topRows(n_); }
  RMat q_block() const { return basis_.bottomRows(n_); }

  /// True when X -> X_Q is injective on the plane.
  bool q_projectable(double tol = kRankTol) const;

 private:
  int n_ = 0;
  RMat basis_;
  double scale_ = 1.0;
};

/// Isotropic k-plane dual to a constraint plane: omega(X_a, Y_b) = delta_ab
/// against the stored basis of the plane.
struct GaugeSurface {
  RMat basis;
  double measure_scale = 1.0;
};

GaugeSurface find_gauge_surface(const ConstraintPlane& L);

/// Checks isotropy, nondegeneracy on L+G and returns |det W| with
/// W_ab = omega(X_a, Y_b).  Throws when any check fails.
double check_gauge_surface(const ConstraintPlane& L, const GaugeSurface& G, double tol = 1e-10);

struct TripleDecomposition {
  RVec l_coords;  // in the basis of L
  RVec g_coords;  // in the basis of G
  RVec l;
  RVec g;
  RVec w;  // in (L+G)^{perp omega}
};

TripleDecomposition triple_decompose(const RVec& v, const ConstraintPlane& L,
                                     const GaugeSurface& G);

/// |det P| * J_to / J_from.
double linear_map_jacobian(const RMat& p, double j_from = 1.0, double j_to = 1.0);
double linear_map_jacobian(const CMat& p, double j_from = 1.0, double j_to = 1.0);

/// Constant Delta with int dmu(X) int dsigma(Y) rho(Y) e^{i omega(X,Y)} =
/// rho(0) Delta.  Requires a dual pair (W = I within tol) unless
/// `allow_nondual`, in which case |det W| enters.
double pairing_constant(const ConstraintPlane& L, const GaugeSurface& G,
                        bool allow_nondual = false);

}  // namespace maslov
