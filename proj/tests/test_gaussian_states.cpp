#include <cmath>
#include <random>

#include "doctest.h"
#include "maslov/gaussian_state.hpp"
#include "maslov/germ.hpp"
#include "maslov/linalg.hpp"
#include "test_util.hpp"

using namespace maslov;
using testutil::random_a;
using testutil::random_cvec;
using testutil::random_isotropic;
using testutil::random_rvec;
using testutil::unit;

namespace {

CMat ci(int n) { return I_unit * CMat::Identity(n, n); }

QuasiGaussianState random_quasi(std::mt19937_64& rng, int n, int degree) {
  GaussianState g = make_gaussian(random_a(rng, n), random_cvec(rng, n, 0.3), cplx(0.8, 0.3));
  Polynomial p = Polynomial::constant(n, 1.0);
  for (int d = 0; d < degree; ++d) p = p * Polynomial::linear(random_cvec(rng, n), cplx(0.4, -0.2));
  return QuasiGaussianState(g, p);
}

}  // namespace

TEST_CASE("make_gaussian validation") {
  CHECK_NOTHROW(make_gaussian(ci(1)));
  CHECK_THROWS_AS(make_gaussian(CMat(CMat::Identity(1, 1))), Error);
  CMat a(2, 2);
  a << I_unit, 0.1, 0.1, I_unit;
  CHECK_NOTHROW(make_gaussian(a));
  CMat ns(2, 2);
  ns << I_unit, 0.1, 0.2, I_unit;
  CHECK_THROWS_AS(make_gaussian(ns), Error);
  CHECK_THROWS_AS(make_gaussian(ci(1), 0.0), Error);
}

TEST_CASE("omega operator on the quasi-Gaussian class") {
  const GaussianState g = make_gaussian(ci(1), 1.0);
  const QuasiGaussianState psi(g);
  const auto x = omega_op_apply(psi, CVec(unit(1, 0).cast<cplx>()));
  CHECK(x.poly.coeff({1}) == cplx(1.0));
  CHECK(x.poly.terms().size() == 1);

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    const CMat A = random_a(rng, n);
    const QuasiGaussianState s(make_gaussian(A, 1.0));
    const CVec q = random_cvec(rng, n);
    CVec y(2 * n);
    y << A * q, q;
    CHECK(omega_op_apply(s, y).poly.pruned(1e-12).max_abs_coeff() < 1e-12);
    CVec z = y;
    z(0) += 0.1;
    CHECK(omega_op_apply(s, z).poly.max_abs_coeff() > 1e-3);
  }
}

TEST_CASE("omega operator matches the differential operator pointwise") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 3;
    const QuasiGaussianState psi = random_quasi(rng, n, 2);
    const CVec y = random_cvec(rng, 2 * n);
    const QuasiGaussianState out = omega_op_apply(psi, y);
    const RVec xi = random_rvec(rng, n, 0.7);
    // Central differences for (1/i) d/dxi.
    const double h = 1e-5;
    cplx expect = (y.head(n).transpose() * xi.cast<cplx>())(0) * psi.evaluate(xi);
    for (int j = 0; j < n; ++j) {
      RVec xp = xi, xm = xi;
      xp(j) += h;
      xm(j) -= h;
      const cplx deriv = (psi.evaluate(xp) - psi.evaluate(xm)) / (2.0 * h);
      expect -= y(n + j) * deriv / I_unit;
    }
    CHECK(std::abs(out.evaluate(xi) - expect) < 1e-6 * std::max(1.0, std::abs(expect)));
  }
}

TEST_CASE("commutator of constraint operators") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 1 + trial % 3;
    const QuasiGaussianState psi = random_quasi(rng, n, 1);
    const CVec y = random_cvec(rng, 2 * n);
    const CVec yp = random_cvec(rng, 2 * n);
    const auto a = omega_op_apply(omega_op_apply(psi, yp), y);
    const auto b = omega_op_apply(omega_op_apply(psi, y), yp);
    const Polynomial comm = a.poly - b.poly;
    const Polynomial expect = psi.poly * (-I_unit * symplectic_form(y, yp));
    CHECK((comm - expect).max_abs_coeff() < 1e-11 * std::max(1.0, expect.max_abs_coeff()));
  }
}

TEST_CASE("Weyl operator") {
  std::mt19937_64 rng(24);
  const QuasiGaussianState psi = random_quasi(rng, 2, 2);
  const auto same = weyl_apply(psi, RVec(RVec::Zero(4)));
  for (int t = 0; t < 5; ++t) {
    const RVec xi = random_rvec(rng, 2);
    CHECK(std::abs(same.evaluate(xi) - psi.evaluate(xi)) < 1e-14);
  }
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    const QuasiGaussianState s = random_quasi(rng, n, 2);
    const RVec x = random_rvec(rng, 2 * n, 0.6);
    const RVec xp = random_rvec(rng, 2 * n, 0.6);
    const auto w = weyl_apply(s, x);
    // Definition, evaluated pointwise.
    const RVec xi = random_rvec(rng, n, 0.8);
    const RVec p = x.head(n), q = x.tail(n);
    const cplx direct = std::exp(I_unit * p.dot(xi) - 0.5 * I_unit * p.dot(q)) * s.evaluate(RVec(xi - q));
    CHECK(std::abs(w.evaluate(xi) - direct) < 1e-12 * std::max(1.0, std::abs(direct)));
    // Group law: W(X') W(X) = W(X + X') exp(i/2 omega(X', X)).
    const auto lhs = weyl_apply(w, xp);
    const auto rhs = weyl_apply(s, RVec(x + xp));
    const cplx phase = std::exp(0.5 * I_unit * symplectic_form(xp, x));
    CHECK(std::abs(lhs.evaluate(xi) - phase * rhs.evaluate(xi)) < 1e-12 * std::max(1.0, std::abs(direct)));
  }
  // Pure shift moves the center and keeps |c|.
  const QuasiGaussianState g(make_gaussian(ci(1), 1.0));
  RVec sh(2);
  sh << 0.0, 1.5;
  const auto moved = weyl_apply(g, sh);
  for (double x : {-1.0, 0.0, 0.7, 2.2}) {
    RVec a(1), b(1);
    a << x + 1.5;
    b << x;
    CHECK(std::abs(moved.evaluate(a) - g.evaluate(b)) < 1e-14);
  }
}

TEST_CASE("S-germ and its matrix") {
  const ComplexGerm r = s_germ(ci(1));
  CHECK(std::abs(r.basis(0, 0) - I_unit) < 1e-15);
  CHECK(std::abs(r.basis(1, 0) - 1.0) < 1e-15);
  const GermReport rep = check_germ(r);
  CHECK(rep.pass);
  CHECK(rep.positivity(0) == doctest::Approx(2.0));

  ComplexGerm scaled = r;
  scaled.basis *= 2.0;
  CHECK(std::abs(germ_to_matrix(scaled).A(0, 0) - I_unit) < 1e-14);

  ComplexGerm conj;
  conj.basis = r.basis.conjugate();
  const GermReport bad = check_germ(conj);
  CHECK_FALSE(bad.pass);
  CHECK(bad.positivity(0) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(germ_to_matrix(conj), Error);

  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    const CMat A = random_a(rng, n);
    const ComplexGerm g = s_germ(A);
    const GermMatrix gm = germ_to_matrix(g);
    CHECK((gm.A - A).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((gm.proj.C - CMat::Identity(n, n)).norm() == 0.0);
    CHECK(check_germ(g).pass);
  }
}

TEST_CASE("Lagrange split in one dimension") {
  const ConstraintPlane lp(1, RMat(unit(1, 0)));
  const LagrangeSplit s = r_perp_and_r_minus(ci(1), lp);
  CHECK(s.r_perp.cols() == 0);
  CHECK(s.r_minus.cols() == 1);
  CHECK(std::abs(s.p_minus(0, 0) - 0.5) < 1e-14);
  CHECK(std::abs(s.p_minus(1, 0) + 0.5 * I_unit) < 1e-14);
  const CVec x = s.p_minus.col(0);
  CHECK((x + x.conjugate() - unit(1, 0).cast<cplx>()).norm() < 1e-14);

  const ConstraintPlane l0(1, RMat(2, 0));
  const LagrangeSplit s0 = r_perp_and_r_minus(ci(1), l0);
  CHECK(s0.r_perp.cols() == 1);
  CHECK(s0.r_minus.cols() == 0);
  CHECK(s0.delta_p_minus == 1.0);

  const ConstraintPlane l2(2, RMat(unit(2, 0)));
  const LagrangeSplit s2 = r_perp_and_r_minus(ci(2), l2);
  CHECK(s2.r_perp.cols() == 1);
  CHECK(s2.r_minus.cols() == 1);
}

TEST_CASE("Lagrange split properties on random instances") {
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 4;
    const int k = trial % (n + 1);
    const ConstraintPlane L(n, random_isotropic(rng, n, k));
    const CMat A = random_a(rng, n);
    const LagrangeSplit s = r_perp_and_r_minus(A, L);
    REQUIRE(s.r_perp.cols() == n - k);
    REQUIRE(s.r_minus.cols() == k);
    const CMat lc = L.basis().cast<cplx>();
    if (k > 0) {
      if (n > k) CHECK(omega_gram(s.r_perp, lc).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((s.p_minus + s.p_minus.conjugate() - lc).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(linalg::span_distance(s.p_minus, s.r_minus) < 1e-9);
      if (n > k) CHECK(positivity_gram(CMat((CMat(2 * n, n) << s.r_perp, s.r_minus).finished()))
                           .block(0, n - k, n - k, k)
                           .cwiseAbs()
                           .maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("H-germ examples") {
  const ConstraintPlane lp(1, RMat(unit(1, 0)));
  const ComplexGerm h1 = h_germ(CMat(CMat::Constant(1, 1, cplx(0.3, 2.0))), lp);
  CHECK(linalg::span_distance(h1.basis, CMat(unit(1, 0).cast<cplx>())) < 1e-12);
  CHECK(check_germ(h1).pass);

  const ConstraintPlane l2(2, RMat(unit(2, 0)));
  const ComplexGerm h2 = h_germ(ci(2), l2);
  CMat expect(4, 2);
  expect << 1, 0, 0, I_unit, 0, 0, 0, 1;
  CHECK(linalg::span_distance(h2.basis, expect) < 1e-12);
  CHECK(check_germ(h2).pass);

  const ConstraintPlane l0(1, RMat(2, 0));
  CHECK(linalg::span_distance(h_germ(ci(1), l0).basis, s_germ(ci(1)).basis) < 1e-12);

  ComplexGerm lonly;
  lonly.basis = unit(1, 0).cast<cplx>();
  lonly.flavor = GermFlavor::H;
  lonly.plane = lp;
  const GermReport rep = check_germ(lonly);
  CHECK(rep.pass);
  CHECK(rep.degenerate_dim == 1);
}

TEST_CASE("H-germ reconstruction") {
  std::mt19937_64 rng(27);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 4;
    const int k = trial % (n + 1);
    const ConstraintPlane L(n, random_isotropic(rng, n, k));
    const CMat A0 = random_a(rng, n);
    const ComplexGerm h = h_germ(A0, L);
    for (std::uint64_t seed : {0ULL, 1ULL + trial}) {
      const CMat A = h_germ_to_matrix(h, L, seed);
      CHECK_NOTHROW(make_gaussian(A));
      CHECK(linalg::span_distance(h_germ(A, L).basis, h.basis) < 1e-8);
      if (k == 0) CHECK((A - A0).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  ComplexGerm bad;
  const ConstraintPlane lp(1, RMat(unit(1, 0)));
  bad.basis = s_germ(ci(1)).basis;
  CHECK_THROWS_AS(h_germ_to_matrix(bad, lp), Error);
}
