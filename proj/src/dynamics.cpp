#include "maslov/dynamics.hpp"

#include <cmath>
#include <functional>

#include <unsupported/Eigen/MatrixFunctions>

#include "maslov/inner_product.hpp"
#include "maslov/linalg.hpp"

namespace maslov {

namespace {

/// Symplectic Gram-Schmidt on a real basis of a symplectic subspace.
RMat darboux_basis(const RMat& w) {
  std::vector<RVec> rest;
  for (Eigen::Index j = 0; j < w.cols(); ++j) rest.emplace_back(w.col(j));
  std::vector<RVec> us, vs;
  while (!rest.empty()) {
    RVec u = rest.front();
    rest.erase(rest.begin());
    u.normalize();
    size_t best = 0;
    double best_val = 0.0;
    for (size_t j = 0; j < rest.size(); ++j) {
      const double val = std::abs(symplectic_form(u, rest[j]));
      if (val > best_val) {
        best_val = val;
        best = j;
      }
    }
    if (best_val < 1e-10) fail_numerical("degenerate_quotient", "form is degenerate on the quotient");
    RVec v = rest[best] / symplectic_form(u, rest[best]);
    rest.erase(rest.begin() + static_cast<long>(best));
    for (RVec& x : rest) {
      const double xu = symplectic_form(x, u);
      const double xv = symplectic_form(x, v);
      x += xu * v - xv * u;
    }
    us.push_back(u);
    vs.push_back(v);
  }
  RMat out(w.rows(), w.cols());
  const Eigen::Index m = static_cast<Eigen::Index>(us.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    out.col(i) = us[i];
    out.col(m + i) = vs[i];
  }
  return out;
}

bool is_centered(const GaussianState& psi) { return psi.b.cwiseAbs().maxCoeff() == 0.0; }

/// exp(-i H' t) psi in the full space for H' = Omega_2(Gamma') + eps'.
struct Representative {
  GaussianState state;
  int substeps = 0;
};

Representative evolve_representative(const GaussianState& psi, const RMat& gen, cplx eps, double t,
                                     int steps) {
  if (steps < 1) fail_validation("bad_steps", "steps must be positive");
  const int n = psi.n();
  // b != 0: psi = c' W(Z) phi with phi centered.
  RVec z = RVec::Zero(2 * n);
  cplx c0 = psi.c;
  const bool centered = is_centered(psi);
  if (!centered) {
    const RMat s = psi.im_a();
    const RVec q = -s.ldlt().solve(RVec(psi.b.imag()));
    const RVec p = psi.b.real() + psi.re_a() * q;
    z << p, q;
    const CVec qc = q.cast<cplx>();
    const cplx phase = 0.5 * I_unit * (qc.transpose() * psi.A * qc)(0) - 0.5 * I_unit * p.dot(q);
    c0 = psi.c / std::exp(phase);
  }
  CMat top(2 * n, n);
  top << psi.A, CMat::Identity(n, n);
  auto det_c = [&](double s) -> cplx {
    const RMat u = (s * gen).exp();
    return (u.bottomRows(n).cast<cplx>() * top).determinant();
  };
  int samples = 0;
  cplx log_det = 0.0;
  std::function<void(double, double, cplx, cplx, int)> walk = [&](double a, double b, cplx da, cplx db,
                                                                  int depth) {
    ++samples;
    const double jump = std::arg(db / da);
    if (std::abs(jump) < 0.5 * kPi) {
      log_det += cplx(std::log(std::abs(db) / std::abs(da)), jump);
      return;
    }
    if (depth >= 16)
      fail_numerical("branch_step_too_coarse", "determinant phase moves too fast; increase steps");
    const double mid = 0.5 * (a + b);
    const cplx dm = det_c(mid);
    walk(a, mid, da, dm, depth + 1);
    walk(mid, b, dm, db, depth + 1);
  };
  cplx prev = 1.0;
  for (int j = 1; j <= steps; ++j) {
    const double a = t * (j - 1) / steps;
    const double b = t * j / steps;
    const cplx cur = det_c(b);
    walk(a, b, prev, cur, 0);
    prev = cur;
  }
  const RMat u = (t * gen).exp();
  const CMat bc = u.cast<cplx>() * top;
  const CMat a_t = bc.topRows(n) * bc.bottomRows(n).inverse();
  const cplx c_t = c0 * std::exp(-I_unit * eps * t - 0.5 * log_det);
  GaussianState phi = make_gaussian(linalg::symmetrize(a_t), c_t, 1e-8);
  Representative rep;
  rep.substeps = samples;
  if (centered) {
    rep.state = phi;
  } else {
    const QuasiGaussianState moved = weyl_apply(QuasiGaussianState(phi), RVec(u * z));
    rep.state = moved.gaussian;
    rep.state.c *= moved.poly.coeff(Polynomial::Index(n, 0));
  }
  return rep;
}

}  // namespace

QuadraticHamiltonian make_hamiltonian(const RMat& gamma, double epsilon, double tol) {
  if (gamma.rows() != gamma.cols() || gamma.rows() % 2 != 0 || gamma.rows() == 0)
    fail_validation("bad_gamma", "Gamma must be 2n x 2n");
  if (!gamma.allFinite() || !std::isfinite(epsilon)) fail_validation("not_finite", "Hamiltonian must be finite");
  if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, gamma.cwiseAbs().maxCoeff()))
    fail_validation("not_symmetric", "Gamma must be symmetric");
  QuadraticHamiltonian h;
  h.gamma = 0.5 * (gamma + gamma.transpose());
  h.epsilon = epsilon;
  return h;
}

ReducedSpace make_reduced_space(const ConstraintPlane& L) {
  return make_reduced_space(L, find_gauge_surface(L));
}

ReducedSpace make_reduced_space(const ConstraintPlane& L, const GaugeSurface& G) {
  check_gauge_surface(L, G);
  const int n = L.n();
  const int k = L.k();
  ReducedSpace r{L, G, RMat(2 * n, 0), RMat(2 * n, 2 * n)};
  RMat lg(2 * n, 2 * k);
  lg << L.basis(), G.basis;
  const RMat w = skew_complement(lg);
  if (w.cols() != 2 * (n - k)) fail_numerical("degenerate_quotient", "quotient has the wrong dimension");
  r.U = w.cols() > 0 ? darboux_basis(w) : w;
  r.frame << L.basis(), G.basis, r.U;
  return r;
}

CVec to_quotient(const ReducedSpace& R, const CVec& y) {
  const CVec c = R.frame.cast<cplx>().partialPivLu().solve(y);
  return c.tail(R.U.cols());
}

CompatibilityReport check_compatibility(const QuadraticHamiltonian& H, const ReducedSpace& R,
                                        double tol) {
  const int n = R.plane.n();
  const int k = R.plane.k();
  if (H.n() != n) fail_validation("dimension_mismatch", "Hamiltonian and plane disagree on n");
  const Eigen::PartialPivLU<RMat> lu(R.frame);
  const RMat fi = lu.inverse();
  const RMat gt = fi * H.gamma * fi.transpose();
  CompatibilityReport rep;
  rep.tol = tol * std::max(1.0, H.gamma.cwiseAbs().maxCoeff());
  if (k > 0) {
    rep.gg_residual = gt.block(k, k, k, k).cwiseAbs().maxCoeff();
    if (n > k) rep.gu_residual = gt.block(k, 2 * k, k, 2 * (n - k)).cwiseAbs().maxCoeff();
  }
  rep.compatible = rep.gg_residual <= rep.tol && rep.gu_residual <= rep.tol;
  return rep;
}

Reduction reduce_hamiltonian(const QuadraticHamiltonian& H, const ConstraintPlane& L, double tol) {
  Reduction red{make_reduced_space(L), RMat(), RMat(), 0.0, RMat()};
  const CompatibilityReport rep = check_compatibility(H, red.space, tol);
  if (!rep.compatible)
    fail_validation("incompatible", "Hamiltonian does not preserve the constraint equivalence");
  const int k = L.k();
  const RMat fi = red.space.frame.partialPivLu().inverse();
  red.gamma_tilde = fi * H.gamma * fi.transpose();
  const int m2 = static_cast<int>(red.space.U.cols());
  red.gamma_bar = linalg::symmetrize(RMat(red.gamma_tilde.bottomRightCorner(m2, m2)));
  red.gamma_prime = linalg::symmetrize(RMat(red.space.U * red.gamma_bar * red.space.U.transpose()));
  // Omega(G_b) Omega(X_a) = Omega(X_a) Omega(G_b) + i delta_ab.
  const double tr = k > 0 ? red.gamma_tilde.block(0, k, k, k).trace() : 0.0;
  red.epsilon_prime = H.epsilon + 0.5 * I_unit * tr;
  return red;
}

RMat circ_generator(const RMat& gamma) {
  return gamma * linalg::symplectic_matrix(half_dim(gamma.rows())).transpose();
}

CVec circ_product(const CVec& y, const RMat& gamma_bar) {
  if (gamma_bar.rows() != y.size() || gamma_bar.cols() != y.size())
    fail_validation("basis_mismatch", "vector and reduced form disagree in dimension");
  return circ_generator(gamma_bar).cast<cplx>() * y;
}

FlowMap classical_flow(const RMat& gamma_bar, double t) {
  FlowMap f;
  f.t = t;
  f.u = (t * circ_generator(gamma_bar)).exp();
  return f;
}

QuasiGaussianState apply_hamiltonian(const RMat& gamma, cplx epsilon, const QuasiGaussianState& psi) {
  const int n = psi.n();
  if (gamma.rows() != 2 * n) fail_validation("dimension_mismatch", "Gamma must be 2n x 2n");
  Polynomial acc = psi.poly * epsilon;
  for (int j = 0; j < 2 * n; ++j) {
    if (gamma.col(j).cwiseAbs().maxCoeff() == 0.0) continue;
    CVec ej = CVec::Zero(2 * n);
    ej(j) = 1.0;
    const QuasiGaussianState inner = omega_op_apply(psi, ej);
    const QuasiGaussianState outer = omega_op_apply(inner, CVec(gamma.col(j).cast<cplx>()));
    acc += outer.poly * cplx(0.5);
  }
  return QuasiGaussianState(psi.gaussian, acc);
}

EvolutionResult evolve_gaussian_full(const GaussianState& psi, const QuadraticHamiltonian& H,
                                     const ConstraintPlane& L, double t, int steps) {
  if (psi.n() != L.n()) fail_validation("dimension_mismatch", "state and plane disagree on n");
  const Reduction red = reduce_hamiltonian(H, L);
  const RMat gen = circ_generator(red.gamma_prime);
  const Representative rep = evolve_representative(psi, gen, red.epsilon_prime, t, steps);
  EvolutionResult out;
  out.representative = rep.state;
  out.substeps = rep.substeps;
  const RMat u = (t * gen).exp();
  out.germ = u.cast<cplx>() * h_germ(psi.A, L).basis;
  if (t == 0.0) {
    out.state = psi;
  } else if (is_centered(psi)) {
    ComplexGerm g;
    g.basis = out.germ;
    g.flavor = GermFlavor::H;
    g.plane = L;
    const CMat a_t = h_germ_to_matrix(g, L);
    const GaussianState phi = make_gaussian(a_t, 1.0, 1e-8);
    const cplx c_t = gaussian_inner_product(phi, rep.state, L) / gaussian_inner_product(phi, phi, L);
    out.state = make_gaussian(a_t, c_t, 1e-8);
  } else {
    out.state = rep.state;
  }
  out.germ_distance = linalg::span_distance(h_germ(out.state.A, L).basis, out.germ);
  return out;
}

GaussianState evolve_gaussian(const GaussianState& psi, const QuadraticHamiltonian& H,
                              const ConstraintPlane& L, double t, int steps) {
  return evolve_gaussian_full(psi, H, L, t, steps).state;
}

QuasiGaussianState evolve_quasi_gaussian(const QuasiGaussianState& psi, const QuadraticHamiltonian& H,
                                         const ConstraintPlane& L, double t, int steps) {
  const int n = psi.n();
  if (n != L.n()) fail_validation("dimension_mismatch", "state and plane disagree on n");
  const Reduction red = reduce_hamiltonian(H, L);
  const RMat gen = circ_generator(red.gamma_prime);
  const Representative core = evolve_representative(psi.gaussian, gen, red.epsilon_prime, t, steps);
  const RMat u = (t * gen).exp();
  // Multiplication by xi_j is Omega(e_Pj); it is carried to Omega(u e_Pj).
  std::vector<CVec> ys;
  for (int j = 0; j < n; ++j) ys.emplace_back(u.col(j).cast<cplx>());
  const QuasiGaussianState base(core.state);
  Polynomial acc(n);
  for (const auto& [alpha, coeff] : psi.poly.terms()) {
    QuasiGaussianState s = base;
    for (int j = 0; j < n; ++j)
      for (int e = 0; e < alpha[j]; ++e) s = omega_op_apply(s, ys[j]);
    acc += s.poly * coeff;
  }
  return QuasiGaussianState(core.state, acc);
}

}  // namespace maslov
