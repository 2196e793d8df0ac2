#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "maslov/types.hpp"

namespace maslov::linalg {

/// Canonical symplectic matrix in (P, Q) block order, so that
/// omega(x, y) = x^T J y = sum_j (P_j Q'_j - P'_j Q_j).
inline RMat symplectic_matrix(int n) {
  RMat j = RMat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = RMat::Identity(n, n);
  j.bottomLeftCorner(n, n) = -RMat::Identity(n, n);
  return j;
}

template <typename Derived>
int numerical_rank(const Eigen::MatrixBase<Derived>& m, double rel_tol = kRankTol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<typename Derived::PlainObject> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

/// Orthonormal basis (columns) of the kernel of m.
template <typename Derived>
typename Derived::PlainObject null_space(const Eigen::MatrixBase<Derived>& m,
                                         double rel_tol = kRankTol) {
  using Mat = typename Derived::PlainObject;
  const Eigen::Index cols = m.cols();
  if (m.rows() == 0) return Mat::Identity(cols, cols);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  const double top = s.size() > 0 ? s(0) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (top > 0.0 && s(i) > rel_tol * top) ++r;
  return svd.matrixV().rightCols(cols - r);
}

/// Orthonormal basis of the column space of m.
template <typename Derived>
typename Derived::PlainObject range_basis(const Eigen::MatrixBase<Derived>& m,
                                          double rel_tol = kRankTol) {
  using Mat = typename Derived::PlainObject;
  if (m.cols() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  const double top = s.size() > 0 ? s(0) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (top > 0.0 && s(i) > rel_tol * top) ++r;
  return svd.matrixU().leftCols(r);
}

/// Column space keeping singular values above an absolute threshold.
template <typename Derived>
typename Derived::PlainObject range_basis_abs(const Eigen::MatrixBase<Derived>& m, double abs_tol) {
  using Mat = typename Derived::PlainObject;
  if (m.cols() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > abs_tol) ++r;
  return svd.matrixU().leftCols(r);
}

/// Largest principal-angle sine between two column spans; 1 when the
/// dimensions differ.
template <typename D1, typename D2>
double span_distance(const Eigen::MatrixBase<D1>& a, const Eigen::MatrixBase<D2>& b) {
  const CMat qa = range_basis(CMat(a.template cast<cplx>()));
  const CMat qb = range_basis(CMat(b.template cast<cplx>()));
  if (qa.cols() != qb.cols()) return 1.0;
  if (qa.cols() == 0) return 0.0;
  const CMat ra = qb - qa * (qa.adjoint() * qb);
  const CMat rb = qa - qb * (qb.adjoint() * qa);
  return std::max(ra.norm() > 0 ? Eigen::JacobiSVD<CMat>(ra).singularValues()(0) : 0.0,
                  rb.norm() > 0 ? Eigen::JacobiSVD<CMat>(rb).singularValues()(0) : 0.0);
}

/// Sign-preserving Gram-Schmidt: b = q r with orthonormal q and upper
/// triangular r having positive diagonal.  Throws on rank deficiency.
struct OrthoResult {
  RMat q;
  RMat r;
};

inline OrthoResult orthonormalize(const RMat& b) {
  if (b.cols() > 0 && numerical_rank(b) < b.cols())
    fail_validation("rank_deficient", "basis vectors are linearly dependent");
  Eigen::HouseholderQR<RMat> qr(b);
  RMat q = qr.householderQ() * RMat::Identity(b.rows(), b.cols());
  RMat r = qr.matrixQR().topRows(b.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < b.cols(); ++i) {
    if (r(i, i) < 0) {
      q.col(i) *= -1.0;
      r.row(i) *= -1.0;
    }
  }
  return {q, r};
}

/// Hermitian positive-definite inverse square root.
inline CMat inverse_sqrt_hpd(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  const RVec ev = es.eigenvalues();
  if (ev.size() > 0 && ev.minCoeff() <= 0.0)
    fail_numerical("not_positive", "Hermitian form is not positive definite");
  return es.eigenvectors() * ev.cwiseInverse().cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

inline CMat symmetrize(const CMat& a) { return 0.5 * (a + a.transpose()); }
inline RMat symmetrize(const RMat& a) { return 0.5 * (a + a.transpose()); }

/// sum_i log(lambda_i) over eigenvalues of a complex matrix, each with the
/// principal branch.  Half of it is the continuous log of sqrt(det) along
/// K + tI, t from +inf to 0, whenever every eigenvalue has Re >= 0.
inline cplx sum_log_eigenvalues(const CMat& k) {
  if (k.rows() == 0) return {0.0, 0.0};
  Eigen::ComplexEigenSolver<CMat> es(k, false);
  cplx s{0.0, 0.0};
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s += std::log(es.eigenvalues()(i));
  return s;
}

}  // namespace maslov::linalg
