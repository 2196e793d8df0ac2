#include "maslov/inner_product.hpp"

#include <cmath>
#include <numeric>

#include "maslov/gaussian_integral.hpp"
#include "maslov/linalg.hpp"

namespace maslov {

namespace {

void check_same_system(const QuasiGaussianState& f, const QuasiGaussianState& g,
                       const ConstraintPlane& L) {
  if (f.n() != g.n() || f.n() != L.n())
    fail_validation("dimension_mismatch", "states and constraint plane disagree on n");
}

}  // namespace

cplx gaussian_inner_product(const QuasiGaussianState& f, const QuasiGaussianState& g,
                            const ConstraintPlane& L) {
  check_same_system(f, g, L);
  const int n = L.n();
  const int k = L.k();
  const CMat xp = L.p_block().cast<cplx>();
  const CMat xq = L.q_block().cast<cplx>();
  const CMat& af = f.gaussian.A;
  const CMat& ag = g.gaussian.A;
  const CVec& bf = f.gaussian.b;
  const CVec& bg = g.gaussian.b;

  // z = (xi, x): conj f(xi) * exp(i P.xi - i/2 P.Q) g(xi - Q), (P, Q) = X x.
  CMat K(n + k, n + k);
  K.topLeftCorner(n, n) = -I_unit * (ag - af.conjugate());
  const CMat kx = -I_unit * (xp - ag * xq);
  K.topRightCorner(n, k) = kx;
  K.bottomLeftCorner(k, n) = kx.transpose();
  K.bottomRightCorner(k, k) =
      linalg::symmetrize(CMat(I_unit * xp.transpose() * xq - I_unit * xq.transpose() * ag * xq));
  CVec v(n + k);
  v.head(n) = I_unit * (bg - bf.conjugate());
  v.tail(k) = -I_unit * xq.transpose() * bg;

  CMat mf = CMat::Zero(n, n + k);
  mf.leftCols(n) = CMat::Identity(n, n);
  CMat mg = mf;
  mg.rightCols(k) = -xq;
  const Polynomial poly =
      f.poly.conj().substitute(mf, CVec::Zero(n)) * g.poly.substitute(mg, CVec::Zero(n));
  const cplx amp = std::conj(f.gaussian.c) * g.gaussian.c * L.measure_scale();
  if (amp == cplx(0.0)) return 0.0;
  return gaussian_integral(K, v, poly, std::log(amp));
}

cplx combination_norm(const std::vector<std::pair<cplx, QuasiGaussianState>>& terms,
                      const ConstraintPlane& L) {
  cplx sum = 0.0;
  for (size_t i = 0; i < terms.size(); ++i) {
    for (size_t j = i; j < terms.size(); ++j) {
      const cplx ip = std::conj(terms[i].first) * terms[j].first *
                      gaussian_inner_product(terms[i].second, terms[j].second, L);
      sum += (i == j) ? ip : ip + std::conj(ip);
    }
  }
  return sum;
}

NormReport gaussian_norm_closed_form(const GaussianState& psi, const ConstraintPlane& L,
                                     double tol) {
  if (psi.b.cwiseAbs().maxCoeff() > 0.0)
    fail_validation("centered_only", "closed-form norm needs b = 0");
  const int n = L.n();
  const int k = L.k();
  NormReport rep;
  const LagrangeSplit split = r_perp_and_r_minus(psi.A, L);
  rep.delta_p_minus = split.delta_p_minus;
  rep.delta_c = 1.0 / std::sqrt((2.0 * psi.im_a()).determinant());
  rep.two_pi_power_twice = n + k;
  rep.closed_form = std::pow(kTwoPi, 0.5 * (n + k)) * std::norm(psi.c) * rep.delta_c / rep.delta_p_minus;
  const cplx ip = gaussian_inner_product(psi, psi, L);
  rep.inner_product = ip.real();
  rep.rel_diff = std::abs(rep.closed_form - ip) / std::abs(ip);
  if (!(rep.rel_diff <= tol))
    fail_numerical("route_mismatch", "closed-form norm disagrees with the direct inner product");
  return rep;
}

QuasiGaussianState reduce_modulo_null(const QuasiGaussianState& psi, const ConstraintPlane& L) {
  check_same_system(psi, psi, L);
  const int n = L.n();
  const int k = L.k();
  if (k == 0 || psi.poly.empty()) return psi;
  const CMat& A = psi.gaussian.A;
  const CMat xq = L.q_block().cast<cplx>();
  // Rows of T: the k constraint forms, then a complement.
  const CMat forms = L.p_block().cast<cplx>().transpose() - xq.transpose() * A;
  CMat t(n, n);
  t.topRows(k) = forms;
  if (n > k) t.bottomRows(n - k) = linalg::null_space(forms).adjoint();
  const Eigen::FullPivLU<CMat> lu(t);
  if (!lu.isInvertible()) fail_numerical("split_dimension", "constraint forms are degenerate");
  Polynomial p = psi.poly.substitute(lu.inverse(), CVec::Zero(n));
  const CMat d = t * xq;  // X_Q . grad_xi = (T X_Q) . grad_z
  const CVec beta = xq.transpose() * psi.gaussian.b;
  for (;;) {
    const Polynomial::Index* best = nullptr;
    int best_deg = -1;
    for (const auto& [alpha, c] : p.terms()) {
      bool hit = false;
      for (int a = 0; a < k; ++a) hit = hit || alpha[a] > 0;
      const int deg = std::accumulate(alpha.begin(), alpha.end(), 0);
      if (hit && deg > best_deg) {
        best = &alpha;
        best_deg = deg;
      }
    }
    if (!best) break;
    const Polynomial::Index alpha = *best;
    const cplx c = p.coeff(alpha);
    int a = 0;
    while (alpha[a] == 0) ++a;
    Polynomial::Index qa = alpha;
    --qa[a];
    const Polynomial q = Polynomial::monomial(qa, c);
    Polynomial::Index ea(n, 0);
    ea[a] = 1;
    // Omega(X_a) (q psi) = (z_a q - beta_a q + i d_a . grad q) psi is null.
    Polynomial o = q * Polynomial::monomial(ea, 1.0) - q * beta(a);
    for (int j = 0; j < n; ++j)
      if (d(j, a) != cplx(0.0)) o += q.derivative(j) * (I_unit * d(j, a));
    p = p - o;
  }
  return QuasiGaussianState(psi.gaussian, p.substitute(t, CVec::Zero(n)));
}

double equivalence_residual(const GaussianState& f, const GaussianState& g, cplx c,
                            const ConstraintPlane& L) {
  const cplx r = combination_norm({{1.0, QuasiGaussianState(f)}, {-c, QuasiGaussianState(g)}}, L);
  return std::abs(r);
}

std::optional<EquivalenceResult> gaussian_equivalent(const GaussianState& f, const GaussianState& g,
                                                     const ConstraintPlane& L, double germ_tol) {
  const ComplexGerm hf = h_germ(f.A, L);
  const ComplexGerm hg = h_germ(g.A, L);
  if (!same_span(hf.basis, hg.basis, germ_tol)) return std::nullopt;
  EquivalenceResult res;
  res.c = gaussian_inner_product(g, f, L) / gaussian_inner_product(g, g, L);
  res.residual = equivalence_residual(f, g, res.c, L);
  return res;
}

cplx DiracGaussian::regular_value(const RVec& xi) const {
  const CVec eta = (support.transpose() * xi).cast<cplx>();
  return c * std::exp(0.5 * I_unit * (eta.transpose() * A * eta)(0) + I_unit * (b.transpose() * eta)(0));
}

DiracGaussian dirac_project(const GaussianState& psi, const ConstraintPlane& L,
                            const GaugeSurface& G) {
  const int n = L.n();
  const int k = L.k();
  if (psi.n() != n) fail_validation("dimension_mismatch", "state and plane disagree on n");
  check_gauge_surface(L, G);
  DiracGaussian out;
  out.n = n;
  if (k == 0) {
    out.support = RMat::Identity(n, n);
    out.delta_directions = RMat(n, 0);
    out.A = psi.A;
    out.b = psi.b;
    out.c = psi.c;
    return out;
  }

  // Rotate the plane basis so that pure-momentum directions separate.
  Eigen::JacobiSVD<RMat> svd(L.q_block(), Eigen::ComputeFullV);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-10) ++r;
  const int d = k - r;
  const RMat xrot = L.basis() * svd.matrixV();
  const RMat pd = xrot.topRows(n).rightCols(d);
  RMat fd(n, 0);
  RMat t(0, 0);
  RMat fs = RMat::Identity(n, n);
  if (d > 0) {
    fd = linalg::range_basis(pd);
    t = fd.transpose() * pd;
    fs = linalg::null_space(RMat(fd.transpose()));
  }
  out.regular = (d == 0);
  out.support = fs;
  out.delta_directions = fd;

  // Integral over the regular shift parameters, in closed form.
  const CMat xpr = xrot.topRows(n).leftCols(r).cast<cplx>();
  const CMat xqr = xrot.bottomRows(n).leftCols(r).cast<cplx>();
  const CMat fsc = fs.cast<cplx>();
  const CMat& A = psi.A;
  const CMat km = linalg::symmetrize(CMat(I_unit * xpr.transpose() * xqr - I_unit * xqr.transpose() * A * xqr));
  const CMat dm = I_unit * (xpr.transpose() * fsc - xqr.transpose() * A * fsc);
  const CVec u0 = -I_unit * xqr.transpose() * psi.b;
  CMat kinv = CMat(r, r);
  cplx log_det = 0.0;
  if (r > 0) {
    Eigen::FullPivLU<CMat> lu(km);
    if (!lu.isInvertible()) fail_numerical("singular_form", "regular shift integral is singular");
    kinv = lu.inverse();
    log_det = linalg::sum_log_eigenvalues(km);
  }
  out.A = linalg::symmetrize(CMat(fsc.transpose() * A * fsc - I_unit * dm.transpose() * kinv * dm));
  out.b = fsc.transpose() * psi.b - I_unit * dm.transpose() * kinv * u0;
  const double log_t = d > 0 ? std::log(std::abs(t.determinant())) : 0.0;
  const cplx log_c = std::log(psi.c) + std::log(L.measure_scale()) + (d + 0.5 * r) * std::log(kTwoPi) -
                     log_t - 0.5 * log_det + 0.5 * (u0.transpose() * kinv * u0)(0);
  out.c = std::exp(log_c);

  if (d == 0) {
    // Germ route: A = B C^{-1} over the H-germ basis and the amplitude from
    // the coordinate projection of P_minus.
    const LagrangeSplit split = r_perp_and_r_minus(A, L);
    CMat basis(2 * n, n);
    basis << split.r_perp, L.basis().cast<cplx>();
    const CMat bb = basis.topRows(n);
    const CMat cc = basis.bottomRows(n);
    Eigen::FullPivLU<CMat> lu(cc);
    if (!lu.isInvertible()) fail_numerical("singular_c", "H-germ coordinate block is singular");
    const CMat a_germ = bb * lu.inverse();
    const CMat coeff = lu.solve(CMat(split.p_minus.bottomRows(n)));
    const CMat m = coeff.bottomRows(k);
    const cplx c_germ = psi.c * std::pow(kTwoPi, 0.5 * k) * std::sqrt(m.determinant()) / split.delta_p_minus;
    double mis = (a_germ - out.A).cwiseAbs().maxCoeff() / std::max(1.0, out.A.cwiseAbs().maxCoeff());
    if (psi.b.cwiseAbs().maxCoeff() == 0.0) {
      // The square root branch is fixed by the direct integral.
      const double e = std::min(std::abs(c_germ - out.c), std::abs(c_germ + out.c)) / std::abs(out.c);
      mis = std::max(mis, e);
    }
    out.route_mismatch = mis;
  }
  return out;
}

GaugeWeight default_gauge_weight(const ConstraintPlane& L, const GaugeSurface& G) {
  GaugeWeight w;
  w.precision = RMat::Identity(L.k(), L.k());
  w.rho0 = 1.0 / pairing_constant(L, G, true);
  return w;
}

DiracNormReport dirac_inner_product(const DiracGaussian& psi, const ConstraintPlane& L,
                                    const GaugeSurface& G, const std::optional<GaugeWeight>& rho) {
  const int n = L.n();
  const int k = L.k();
  if (psi.n != n) fail_validation("dimension_mismatch", "Dirac state and plane disagree on n");
  const GaugeWeight w = rho ? *rho : default_gauge_weight(L, G);
  if (!(w.rho0 > 0.0)) fail_validation("bad_weight", "rho(0) must be positive");
  if (w.precision.rows() != k || w.precision.cols() != k)
    fail_validation("dimension_mismatch", "weight precision must be k x k");
  DiracNormReport rep;
  const double delta = pairing_constant(L, G, true);
  rep.rho_normalized = std::abs(w.rho0 * delta - 1.0) <= 1e-12;

  const int m = static_cast<int>(psi.support.cols());
  const int d = static_cast<int>(psi.delta_directions.cols());
  const CMat fs = psi.support.cast<cplx>();
  const CMat gp = G.basis.topRows(n).cast<cplx>();
  const CMat gq = G.basis.bottomRows(n).cast<cplx>();
  const CMat hs = fs.transpose() * gq;
  const CMat hd = psi.delta_directions.cast<cplx>().transpose() * gq;
  const CMat& A = psi.A;

  // z = (eta, y, mu); mu is the Fourier variable of the delta in y.
  const int nn = m + k + d;
  CMat K = CMat::Zero(nn, nn);
  K.topLeftCorner(m, m) = -I_unit * (A - A.conjugate());
  const CMat key = I_unit * A * hs - I_unit * fs.transpose() * gp;
  K.block(0, m, m, k) = key;
  K.block(m, 0, k, m) = key.transpose();
  K.block(m, m, k, k) = -I_unit * hs.transpose() * A * hs +
                        I_unit * linalg::symmetrize(CMat(gp.transpose() * gq)) + w.precision.cast<cplx>();
  const CMat kym = -I_unit * hd.transpose();
  K.block(m, m + k, k, d) = kym;
  K.block(m + k, m, d, k) = kym.transpose();
  CVec v = CVec::Zero(nn);
  v.head(m) = I_unit * (psi.b - psi.b.conjugate());
  v.segment(m, k) = -I_unit * hs.transpose() * psi.b;
  const cplx log_amp = std::log(std::norm(psi.c) * G.measure_scale * w.rho0) - d * std::log(kTwoPi);
  const cplx val = gaussian_integral(K, v, Polynomial::constant(nn, 1.0), log_amp);
  rep.value = val.real();
  rep.imag_residual = std::abs(val.imag());
  return rep;
}

}  // namespace maslov
