#include "maslov/symplectic.hpp"

#include <cmath>
#include <string>

#include "maslov/linalg.hpp"

namespace maslov {

namespace {

template <typename Vec>
void check_same_dim(const Vec& x, const Vec& y) {
  if (x.size() != y.size())
    fail_validation("dimension_mismatch", "phase vectors have different lengths");
  half_dim(x.size());
}

template <typename Mat>
Mat apply_j(const Mat& b) {
  const int n = half_dim(b.rows());
  Mat out(b.rows(), b.cols());
  out.topRows(n) = b.bottomRows(n);
  out.bottomRows(n) = -b.topRows(n);
  return out;
}

}  // namespace

double symplectic_form(const RVec& x, const RVec& y) {
  check_same_dim(x, y);
  const Eigen::Index n = x.size() / 2;
  return x.head(n).dot(y.tail(n)) - y.head(n).dot(x.tail(n));
}

cplx symplectic_form(const CVec& x, const CVec& y) {
  check_same_dim(x, y);
  const Eigen::Index n = x.size() / 2;
  return (x.head(n).transpose() * y.tail(n))(0) - (y.head(n).transpose() * x.tail(n))(0);
}

RMat omega_gram(const RMat& a, const RMat& b) {
  if (a.rows() != b.rows()) fail_validation("dimension_mismatch", "bases have different ambient dimension");
  return a.transpose() * apply_j(b);
}

CMat omega_gram(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows()) fail_validation("dimension_mismatch", "bases have different ambient dimension");
  return a.transpose() * apply_j(b);
}

bool is_isotropic(const RMat& basis, double tol) {
  if (basis.cols() == 0) return true;
  return omega_gram(basis, basis).cwiseAbs().maxCoeff() <= tol;
}

bool is_isotropic(const CMat& basis, double tol) {
  if (basis.cols() == 0) return true;
  return omega_gram(basis, basis).cwiseAbs().maxCoeff() <= tol;
}

RMat skew_complement(const RMat& basis) {
  half_dim(basis.rows());
  if (basis.cols() > 0 && linalg::numerical_rank(basis) < basis.cols())
    fail_validation("rank_deficient", "subspace basis is rank deficient");
  if (basis.cols() == 0) return RMat::Identity(basis.rows(), basis.rows());
  // omega(b, Y) = b^T J Y, so the complement is ker(b^T J).
  return linalg::null_space(RMat(basis.transpose() * linalg::symplectic_matrix(half_dim(basis.rows()))));
}

CMat skew_complement(const CMat& basis) {
  half_dim(basis.rows());
  if (basis.cols() > 0 && linalg::numerical_rank(basis) < basis.cols())
    fail_validation("rank_deficient", "subspace basis is rank deficient");
  if (basis.cols() == 0) return CMat::Identity(basis.rows(), basis.rows());
  const CMat j = linalg::symplectic_matrix(half_dim(basis.rows())).cast<cplx>();
  return linalg::null_space(CMat(basis.transpose() * j));
}

ConstraintPlane::ConstraintPlane(int n, const RMat& basis, double measure_scale, double tol)
    : n_(n) {
  if (n < 0) fail_validation("bad_dimension", "n must be non-negative");
  if (basis.rows() != 2 * n)
    fail_validation("dimension_mismatch", "constraint vectors must have length 2n");
  if (basis.cols() > n) fail_validation("too_many_constraints", "k must not exceed n");
  if (!(measure_scale > 0.0) || !std::isfinite(measure_scale))
    fail_validation("bad_measure", "measure scale must be positive");
  if (basis.cols() == 0) {
    // The measure on a point is the unit mass.
    basis_ = RMat(2 * n, 0);
    scale_ = 1.0;
    return;
  }
  // Isotropy is judged on the normalized basis so the tolerance is scale free.
  const auto o = linalg::orthonormalize(basis);
  const RMat w = omega_gram(o.q, o.q);
  for (Eigen::Index a = 0; a < w.rows(); ++a)
    for (Eigen::Index b = a + 1; b < w.cols(); ++b)
      if (std::abs(w(a, b)) > tol)
        fail_validation("not_isotropic", "constraints " + std::to_string(a) + " and " +
                                             std::to_string(b) + " are not in involution");
  basis_ = o.q;
  scale_ = measure_scale / std::abs(o.r.diagonal().prod());
}

bool ConstraintPlane::q_projectable(double tol) const {
  if (k() == 0) return true;
  return linalg::numerical_rank(q_block(), tol) == k();
}

GaugeSurface find_gauge_surface(const ConstraintPlane& L) {
  const int k = L.k();
  const int n = L.n();
  GaugeSurface g;
  if (k == 0) {
    g.basis = RMat(2 * n, 0);
    return g;
  }
  const RMat x = L.basis();
  // Minimum-norm solution of omega(X_a, Y_b) = delta_ab.
  const RMat rows = x.transpose() * linalg::symplectic_matrix(n);
  RMat y = rows.completeOrthogonalDecomposition().solve(RMat::Identity(k, k));
  // Shear along L to make G isotropic; omega(X, X) = 0 keeps duality.
  const RMat om = omega_gram(y, y);
  y += x * (0.5 * om);
  g.basis = y;
  g.measure_scale = 1.0;
  check_gauge_surface(L, g);
  return g;
}

double check_gauge_surface(const ConstraintPlane& L, const GaugeSurface& G, double tol) {
  if (G.basis.rows() != 2 * L.n() || G.basis.cols() != L.k())
    fail_validation("dimension_mismatch", "gauge surface must have k vectors of length 2n");
  if (L.k() == 0) return 1.0;
  if (!is_isotropic(G.basis, tol * std::max(1.0, G.basis.squaredNorm())))
    fail_validation("gauge_not_isotropic", "gauge surface is not isotropic");
  const RMat w = omega_gram(L.basis(), G.basis);
  const double det = std::abs(w.determinant());
  if (det <= tol * std::pow(G.basis.norm(), L.k()))
    fail_validation("gauge_degenerate", "omega is degenerate on L + G");
  if (!(G.measure_scale > 0.0)) fail_validation("bad_measure", "measure scale must be positive");
  return det;
}

TripleDecomposition triple_decompose(const RVec& v, const ConstraintPlane& L,
                                     const GaugeSurface& G) {
  if (v.size() != 2 * L.n()) fail_validation("dimension_mismatch", "vector length must be 2n");
  check_gauge_surface(L, G);
  const RMat& x = L.basis();
  const RMat& y = G.basis;
  TripleDecomposition d;
  if (L.k() == 0) {
    d.l_coords = d.g_coords = RVec(0);
    d.l = d.g = RVec::Zero(v.size());
    d.w = v;
    return d;
  }
  // With W_ab = omega(X_a, Y_b): omega(v, Y) = W^T a and omega(X, v) = W b.
  const RMat w = omega_gram(x, y);
  const RVec vy = omega_gram(RMat(v), y).transpose();
  const RVec xv = omega_gram(x, RMat(v));
  d.l_coords = w.transpose().partialPivLu().solve(vy);
  d.g_coords = w.partialPivLu().solve(xv);
  d.l = x * d.l_coords;
  d.g = y * d.g_coords;
  d.w = v - d.l - d.g;
  return d;
}

double linear_map_jacobian(const RMat& p, double j_from, double j_to) {
  if (p.rows() != p.cols()) fail_validation("not_square", "Jacobian needs a square matrix");
  if (p.rows() == 0) return std::abs(j_to / j_from);
  const double d = std::abs(p.determinant());
  if (d <= kRankTol * std::pow(std::max(p.norm(), 1e-300), p.rows()))
    fail_numerical("singular_map", "map is singular");
  return d * std::abs(j_to) / std::abs(j_from);
}

double linear_map_jacobian(const CMat& p, double j_from, double j_to) {
  if (p.rows() != p.cols()) fail_validation("not_square", "Jacobian needs a square matrix");
  if (p.rows() == 0) return std::abs(j_to / j_from);
  const double d = std::abs(p.determinant());
  if (d <= kRankTol * std::pow(std::max(p.norm(), 1e-300), p.rows()))
    fail_numerical("singular_map", "map is singular");
  return d * std::abs(j_to) / std::abs(j_from);
}

double pairing_constant(const ConstraintPlane& L, const GaugeSurface& G, bool allow_nondual) {
  const double det = check_gauge_surface(L, G);
  if (L.k() == 0) return 1.0;
  if (!allow_nondual) {
    const RMat w = omega_gram(L.basis(), G.basis);
    if ((w - RMat::Identity(L.k(), L.k())).cwiseAbs().maxCoeff() > 1e-10)
      fail_validation("not_dual", "gauge basis is not dual to the constraint basis");
  }
  return std::pow(kTwoPi, L.k()) * L.measure_scale() * G.measure_scale / det;
}

}  // namespace maslov
