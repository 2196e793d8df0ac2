#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "maslov/symplectic.hpp"
#include "maslov/types.hpp"

namespace maslov {

enum class GermFlavor { S, H };

/// n-dimensional subspace of C^{2n}; bases are not canonical.
struct ComplexGerm {
  CMat basis;  // 2n x n
  GermFlavor flavor = GermFlavor::S;
  std::optional<ConstraintPlane> plane;  // set for H-germs

  int n() const { return static_cast<int>(basis.rows() / 2); }
};

/// Momentum and coordinate blocks of a germ basis.
struct GermProjectors {
  CMat B;
  CMat C;
};

/// Graph of A: columns (A e_j, e_j).
ComplexGerm s_germ(const CMat& A);

struct GermMatrix {
  CMat A;
  GermProjectors proj;
};

/// A = B C^{-1}; rejects germs whose A is not symmetric with Im A > 0.
GermMatrix germ_to_matrix(const ComplexGerm& r, double tol = 1e-10);

/// Hermitian Gram matrix of h(Y, Y') = (1/i) omega(Y, conj Y') on a basis.
CMat positivity_gram(const CMat& basis);

struct GermReport {
  bool pass = false;
  double isotropy_residual = 0.0;
  RVec positivity;            // eigenvalues of the positivity Gram on the given basis
  RVec positivity_normalized;  // same on a Euclidean-orthonormal basis
  int degenerate_dim = 0;
  double degeneracy_distance = 0.0;  // span distance of the kernel to L^C (H-germs)
  std::string message;
};

GermReport check_germ(const ComplexGerm& r, double tol = 1e-9);

/// Equality of spans via principal angles.
bool same_span(const CMat& a, const CMat& b, double tol = 1e-8);

struct LagrangeSplit {
  CMat r_perp;       // 2n x (n-k) vectors of r(A) skew-orthogonal to L^C
  CMat r_minus;      // 2n x k vectors of r(A) h-orthogonal to r_perp
  CMat p_minus;      // 2n x k, column a is the image X_a^- of the stored X_a
  CMat q_perp;       // coordinates of r_perp in the graph basis
  CMat q_minus;      // coordinates of r_minus in the graph basis
  double delta_p_minus = 1.0;
};

/// r_perp, r_minus and the split X = X_- + conj(X_-) for X in L.
LagrangeSplit r_perp_and_r_minus(const CMat& A, const ConstraintPlane& L);

ComplexGerm h_germ(const CMat& A, const ConstraintPlane& L);

/// One A with h_germ(A, L) == r.  A nonzero seed randomizes the complement
/// and gauge choices; every choice yields an equivalent state.
CMat h_germ_to_matrix(const ComplexGerm& r, const ConstraintPlane& L, std::uint64_t seed = 0);

}  // namespace maslov
