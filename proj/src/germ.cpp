#include "maslov/germ.hpp"

#include <cmath>
#include <random>

#include "maslov/linalg.hpp"

namespace maslov {

namespace {

CMat graph(const CMat& A, const CMat& q) {
  CMat out(2 * A.rows(), q.cols());
  out.topRows(A.rows()) = A * q;
  out.bottomRows(A.rows()) = q;
  return out;
}

CMat random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> nd(0.0, 1.0);
  CMat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cplx(nd(rng), nd(rng));
  return m;
}

}  // namespace

ComplexGerm s_germ(const CMat& A) {
  if (A.rows() != A.cols()) fail_validation("not_square", "A must be square");
  ComplexGerm g;
  g.basis = graph(A, CMat::Identity(A.rows(), A.cols()));
  g.flavor = GermFlavor::S;
  return g;
}

GermMatrix germ_to_matrix(const ComplexGerm& r, double tol) {
  const int n = half_dim(r.basis.rows());
  if (r.basis.cols() != n) fail_validation("germ_dimension", "a germ needs exactly n basis vectors");
  GermMatrix out;
  out.proj.B = r.basis.topRows(n);
  out.proj.C = r.basis.bottomRows(n);
  if (n == 0) {
    out.A = CMat(0, 0);
    return out;
  }
  Eigen::FullPivLU<CMat> lu(out.proj.C);
  lu.setThreshold(kRankTol);
  if (!lu.isInvertible())
    fail_validation("singular_c", "coordinate projection of the germ is not invertible");
  const CMat at = out.proj.B * lu.inverse();
  const double scale = std::max(1.0, at.cwiseAbs().maxCoeff());
  if ((at - at.transpose()).cwiseAbs().maxCoeff() > tol * scale * 1e2)
    fail_validation("not_isotropic", "germ is not isotropic: B C^{-1} is not symmetric");
  out.A = linalg::symmetrize(at);
  Eigen::SelfAdjointEigenSolver<RMat> es(RMat(out.A.imag()));
  if (es.eigenvalues().minCoeff() <= tol * scale)
    fail_validation("not_positive", "germ fails positivity: Im A is not positive definite");
  return out;
}

// Entry (i, j) is omega(r_i, conj r_j) / i, so h(r a, r b) = a^T G conj(b).
CMat positivity_gram(const CMat& basis) {
  return omega_gram(basis, CMat(basis.conjugate())) / I_unit;
}

bool same_span(const CMat& a, const CMat& b, double tol) {
  return linalg::span_distance(a, b) < tol;
}

GermReport check_germ(const ComplexGerm& r, double tol) {
  GermReport rep;
  const int n = half_dim(r.basis.rows());
  const CMat q = linalg::range_basis(r.basis);
  {
    const CMat h = positivity_gram(r.basis);
    rep.positivity = Eigen::SelfAdjointEigenSolver<CMat>(0.5 * (h + h.adjoint())).eigenvalues();
  }
  if (q.cols() != n) {
    rep.message = "basis spans dimension " + std::to_string(q.cols()) + ", expected " + std::to_string(n);
    return rep;
  }
  rep.isotropy_residual = n > 0 ? omega_gram(q, q).cwiseAbs().maxCoeff() : 0.0;
  const CMat hq = positivity_gram(q);
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (hq + hq.adjoint()));
  rep.positivity_normalized = es.eigenvalues();
  if (rep.isotropy_residual > tol) {
    rep.message = "not isotropic";
    return rep;
  }
  if (r.flavor == GermFlavor::S) {
    if (n > 0 && rep.positivity_normalized.minCoeff() <= tol) {
      rep.message = "positivity fails";
      return rep;
    }
    rep.pass = true;
    rep.message = "ok";
    return rep;
  }
  if (!r.plane) {
    rep.message = "H-germ without constraint plane";
    return rep;
  }
  const ConstraintPlane& L = *r.plane;
  if (L.n() != n) {
    rep.message = "constraint plane dimension mismatch";
    return rep;
  }
  if (n > 0 && rep.positivity_normalized.minCoeff() < -tol) {
    rep.message = "positivity fails";
    return rep;
  }
  std::vector<Eigen::Index> ker;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) <= tol) ker.push_back(i);
  rep.degenerate_dim = static_cast<int>(ker.size());
  CMat kv(2 * n, ker.size());
  for (size_t i = 0; i < ker.size(); ++i) kv.col(i) = q * es.eigenvectors().col(ker[i]).conjugate();
  rep.degeneracy_distance = linalg::span_distance(kv, CMat(L.basis().cast<cplx>()));
  if (rep.degenerate_dim != L.k() || rep.degeneracy_distance > std::sqrt(tol)) {
    rep.message = "degeneracy subspace differs from L^C";
    return rep;
  }
  rep.pass = true;
  rep.message = "ok";
  return rep;
}

LagrangeSplit r_perp_and_r_minus(const CMat& A, const ConstraintPlane& L) {
  const int n = L.n();
  const int k = L.k();
  if (A.rows() != n || A.cols() != n) fail_validation("dimension_mismatch", "A must be n x n");
  LagrangeSplit out;
  if (k == 0) {
    out.q_perp = CMat::Identity(n, n);
    out.q_minus = CMat(n, 0);
    out.r_perp = graph(A, out.q_perp);
    out.r_minus = CMat(2 * n, 0);
    out.p_minus = CMat(2 * n, 0);
    out.delta_p_minus = 1.0;
    return out;
  }
  const CMat xp = L.p_block().cast<cplx>();
  const CMat xq = L.q_block().cast<cplx>();
  const RMat s = A.imag();
  const RMat re = A.real();
  // omega(X_a, (A q, q)) = (X_P^T - X_Q^T A) q
  const CMat nmat = xp.transpose() - xq.transpose() * A;
  if (linalg::numerical_rank(nmat) != k)
    fail_numerical("split_dimension", "r(A) meets the skew complement of L^C in the wrong dimension");
  out.q_perp = linalg::null_space(nmat);
  out.r_perp = graph(A, out.q_perp);
  // h on r(A) has Gram 2 q'^* S q in graph coordinates.
  const CMat sc = s.cast<cplx>();
  if (n - k > 0) {
    out.q_minus = linalg::null_space(CMat(out.q_perp.adjoint() * sc));
  } else {
    out.q_minus = CMat::Identity(n, n);
  }
  if (out.q_minus.cols() != k)
    fail_numerical("split_dimension", "r_minus has the wrong dimension");
  out.r_minus = graph(A, out.q_minus);
  const Eigen::LDLT<RMat> sinv(s);
  const RMat xpr = L.p_block();
  const RMat xqr = L.q_block();
  const RMat im_part = 0.5 * sinv.solve(RMat(re * xqr - xpr));
  const CMat qx = 0.5 * xqr.cast<cplx>() + I_unit * im_part.cast<cplx>();
  out.p_minus = graph(A, qx);
  const CMat g = positivity_gram(out.p_minus);
  const double det = std::abs(g.determinant());
  if (!(det > 0.0)) fail_numerical("singular_map", "P_minus is singular");
  out.delta_p_minus = std::sqrt(det) / L.measure_scale();
  return out;
}

ComplexGerm h_germ(const CMat& A, const ConstraintPlane& L) {
  const LagrangeSplit split = r_perp_and_r_minus(A, L);
  ComplexGerm g;
  g.flavor = GermFlavor::H;
  g.plane = L;
  g.basis.resize(2 * L.n(), L.n());
  g.basis << split.r_perp, L.basis().cast<cplx>();
  return g;
}

CMat h_germ_to_matrix(const ComplexGerm& r, const ConstraintPlane& L, std::uint64_t seed) {
  const int n = L.n();
  const int k = L.k();
  ComplexGerm rr = r;
  rr.flavor = GermFlavor::H;
  rr.plane = L;
  const GermReport rep = check_germ(rr);
  if (!rep.pass) fail_validation("bad_h_germ", "H-germ check failed: " + rep.message);
  if (k == 0) return germ_to_matrix(rr).A;
  std::mt19937_64 rng(seed);
  const CMat lc = L.basis().cast<cplx>();
  const CMat rb = linalg::range_basis(r.basis);
  // V: a complement of L^C inside the germ.
  CMat v = linalg::range_basis_abs(CMat(rb - lc * (lc.adjoint() * rb)), 1e-6);
  if (v.cols() != n - k) fail_numerical("germ_complement", "could not split L^C off the germ");
  if (seed != 0 && n - k > 0) v += lc * (0.5 * random_complex(rng, k, n - k));
  // W = (V + conj V)^{perp omega} is real and symplectic of dimension 2k.
  RMat vr(2 * n, 2 * (n - k));
  vr << v.real(), v.imag();
  const RMat jm = linalg::symplectic_matrix(n);
  const RMat w = (n - k > 0) ? linalg::null_space(RMat(vr.transpose() * jm)) : RMat(RMat::Identity(2 * n, 2 * n));
  if (w.cols() != 2 * k) fail_numerical("germ_complement", "skew complement of V has the wrong dimension");
  // Gauge directions dual to L inside W.
  const RMat& x = L.basis();
  const RMat m = x.transpose() * jm * w;
  RMat c = m.completeOrthogonalDecomposition().solve(RMat::Identity(k, k));
  if (seed != 0) {
    const RMat nm = linalg::null_space(m);
    std::normal_distribution<double> nd(0.0, 0.5);
    RMat rnd(nm.cols(), k);
    for (Eigen::Index j = 0; j < rnd.cols(); ++j)
      for (Eigen::Index i = 0; i < rnd.rows(); ++i) rnd(i, j) = nd(rng);
    c += nm * rnd;
  }
  RMat y = w * c;
  y += x * (0.5 * omega_gram(y, y));
  ComplexGerm full;
  full.basis.resize(2 * n, n);
  full.basis << v, (x.cast<cplx>() - I_unit * y.cast<cplx>());
  full.flavor = GermFlavor::S;
  return germ_to_matrix(full).A;
}

}  // namespace maslov
