#include "maslov/gaussian_state.hpp"

#include <cmath>

namespace maslov {

cplx GaussianState::evaluate(const RVec& xi) const {
  const CVec x = xi.cast<cplx>();
  const cplx e = 0.5 * I_unit * (x.transpose() * A * x)(0) + I_unit * (b.transpose() * x)(0);
  return c * std::exp(e);
}

GaussianState make_gaussian(const CMat& A, const CVec& b, cplx c, double tol) {
  if (A.rows() != A.cols()) fail_validation("not_square", "A must be square");
  if (A.rows() == 0) fail_validation("bad_dimension", "n must be positive");
  if (b.size() != A.rows()) fail_validation("dimension_mismatch", "b must have length n");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    fail_validation("not_symmetric", "A must be symmetric");
  if (!A.allFinite() || !b.allFinite() || !std::isfinite(c.real()) || !std::isfinite(c.imag()))
    fail_validation("not_finite", "state parameters must be finite");
  if (c == cplx(0.0)) fail_validation("zero_amplitude", "amplitude c must be nonzero");
  GaussianState g;
  g.A = 0.5 * (A + A.transpose());
  g.b = b;
  g.c = c;
  if (A.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<RMat> es(g.im_a());
    if (es.eigenvalues().minCoeff() <= tol * scale)
      fail_validation("not_normalizable", "Im A must be positive definite");
  }
  return g;
}

GaussianState make_gaussian(const CMat& A, cplx c, double tol) {
  return make_gaussian(A, CVec::Zero(A.rows()), c, tol);
}

cplx QuasiGaussianState::evaluate(const RVec& xi) const {
  return poly.evaluate(xi) * gaussian.evaluate(xi);
}

QuasiGaussianState omega_op_apply(const QuasiGaussianState& psi, const CVec& y) {
  const int n = psi.n();
  if (y.size() != 2 * n) fail_validation("dimension_mismatch", "Y must have length 2n");
  const CVec p = y.head(n);
  const CVec q = y.tail(n);
  const GaussianState& g = psi.gaussian;
  // Omega(Y)(Pol G) = [(P - A Q).xi Pol - (Q.b) Pol + i Q.grad Pol] G
  const CVec lin = p - g.A * q;
  const cplx qb = (q.transpose() * g.b)(0);
  Polynomial out = Polynomial::linear(lin, -qb) * psi.poly;
  for (int j = 0; j < n; ++j)
    if (q(j) != cplx(0.0)) out += psi.poly.derivative(j) * (I_unit * q(j));
  return QuasiGaussianState(g, out);
}

QuasiGaussianState weyl_apply(const QuasiGaussianState& psi, const CVec& x) {
  const int n = psi.n();
  if (x.size() != 2 * n) fail_validation("dimension_mismatch", "X must have length 2n");
  const CVec p = x.head(n);
  const CVec q = x.tail(n);
  const GaussianState& g = psi.gaussian;
  GaussianState out = g;
  out.b = g.b - g.A * q + p;
  const cplx phase = 0.5 * I_unit * (q.transpose() * g.A * q)(0) -
                     I_unit * (g.b.transpose() * q)(0) - 0.5 * I_unit * (p.transpose() * q)(0);
  out.c = g.c * std::exp(phase);
  const Polynomial shifted = psi.poly.substitute(CMat::Identity(n, n), CVec(-q));
  return QuasiGaussianState(out, shifted);
}

QuasiGaussianState add_same_core(const QuasiGaussianState& f, const QuasiGaussianState& g,
                                 cplx alpha, cplx beta) {
  const double tol = 1e-12 * std::max(1.0, f.gaussian.A.cwiseAbs().maxCoeff());
  if (f.n() != g.n() || (f.gaussian.A - g.gaussian.A).cwiseAbs().maxCoeff() > tol ||
      (f.gaussian.b - g.gaussian.b).cwiseAbs().maxCoeff() > tol)
    fail_validation("core_mismatch", "states must share the Gaussian core");
  QuasiGaussianState out = f;
  out.gaussian.c = 1.0;
  out.poly = f.poly * (alpha * f.gaussian.c) + g.poly * (beta * g.gaussian.c);
  return out;
}

QuasiGaussianState absorb_amplitude(const QuasiGaussianState& psi) {
  QuasiGaussianState out = psi;
  out.poly = psi.poly * psi.gaussian.c;
  out.gaussian.c = 1.0;
  return out;
}

}  // namespace maslov
