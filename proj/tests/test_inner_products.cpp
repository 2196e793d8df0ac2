#include <cmath>
#include <random>

#include "doctest.h"
#include "maslov/inner_product.hpp"
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
CMat scalar(cplx a) { return CMat::Constant(1, 1, a); }

// Plain nested trapezoid for n = 1, k = 1 with the plane spanned by (p, q).
cplx trapezoid_product(const GaussianState& f, const GaussianState& g, double p, double q) {
  const int m = 801;
  const double r = 12.0;
  const double h = 2.0 * r / (m - 1);
  cplx total = 0.0;
  for (int a = 0; a < m; ++a) {
    const double x = -r + a * h;
    const double pp = p * x, qq = q * x;
    cplx inner = 0.0;
    for (int j = 0; j < m; ++j) {
      const double xi = -r + j * h;
      RVec v(1), w(1);
      v << xi;
      w << xi - qq;
      inner += std::conj(f.evaluate(v)) * std::exp(I_unit * (pp * xi - 0.5 * pp * qq)) * g.evaluate(w);
    }
    total += inner * h;
  }
  return total * h;
}

QuasiGaussianState random_quasi(std::mt19937_64& rng, int n, int degree, bool centered = false) {
  const CVec b = centered ? CVec(CVec::Zero(n)) : random_cvec(rng, n, 0.3);
  GaussianState g = make_gaussian(random_a(rng, n), b, cplx(0.9, -0.2));
  Polynomial p = Polynomial::constant(n, 1.0);
  for (int d = 0; d < degree; ++d) p = p * Polynomial::linear(random_cvec(rng, n), cplx(0.5, 0.1));
  return QuasiGaussianState(g, p);
}

}  // namespace

TEST_CASE("one-dimensional constraint examples") {
  const ConstraintPlane lp(1, RMat(unit(1, 1)));  // Omega(e_Q) = -p
  const ConstraintPlane lq(1, RMat(unit(1, 0)));  // Omega(e_P) = xi
  const GaussianState psi = make_gaussian(ci(1), cplx(0.6, 0.8) * 1.5);
  const double c2 = std::norm(psi.c);
  CHECK(std::abs(gaussian_inner_product(psi, psi, lp) - kTwoPi * c2) < 1e-12);
  CHECK(std::abs(gaussian_inner_product(psi, psi, lq) - kTwoPi * c2) < 1e-12);
  // |int psi|^2 with int exp(-xi^2/2) = sqrt(2 pi).
  const GaussianState wide = make_gaussian(scalar(0.5 * I_unit), 1.0);
  CHECK(std::abs(gaussian_inner_product(wide, wide, lp) - 4.0 * M_PI) < 1e-12);
  CHECK(std::abs(gaussian_inner_product(wide, wide, lq) - kTwoPi) < 1e-12);
  const ConstraintPlane l0(1, RMat(2, 0));
  CHECK(std::abs(gaussian_inner_product(psi, psi, l0) - std::sqrt(M_PI) * c2) < 1e-12);
}

TEST_CASE("inner product against a nested trapezoid oracle") {
  const double th = 0.7;
  const ConstraintPlane L(1, (RMat(2, 1) << std::cos(th), std::sin(th)).finished());
  const GaussianState f = make_gaussian(scalar(cplx(0.3, 1.1)), CVec::Constant(1, cplx(0.2, 0.1)), cplx(1.0, 0.5));
  const GaussianState g = make_gaussian(scalar(cplx(-0.2, 0.8)), CVec::Constant(1, cplx(-0.3, 0.05)), cplx(0.7, -0.4));
  const cplx oracle = trapezoid_product(f, g, std::cos(th), std::sin(th));
  const cplx closed = gaussian_inner_product(f, g, L);
  CHECK(std::abs(closed - oracle) < 1e-10 * std::abs(oracle));
  // Frozen value of the oracle.
  CHECK(std::abs(oracle - cplx(2.4138034679462641, -5.177896977113952)) < 1e-9);
}

TEST_CASE("closed-form norm") {
  const ConstraintPlane lq(1, RMat(unit(1, 0)));
  const NormReport r1 = gaussian_norm_closed_form(make_gaussian(ci(1)), lq);
  CHECK(r1.closed_form == doctest::Approx(kTwoPi).epsilon(1e-12));
  CHECK(r1.two_pi_power_twice == 2);
  for (int n = 1; n <= 3; ++n) {
    const ConstraintPlane l0(n, RMat(2 * n, 0));
    CHECK(gaussian_norm_closed_form(make_gaussian(ci(n)), l0).closed_form ==
          doctest::Approx(std::pow(M_PI, 0.5 * n)).epsilon(1e-12));
  }
  const double one = gaussian_norm_closed_form(make_gaussian(ci(1), 1.0), lq).closed_form;
  const double two = gaussian_norm_closed_form(make_gaussian(ci(1), 2.0), lq).closed_form;
  CHECK(two == doctest::Approx(4.0 * one));

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 1 + trial % 4;
    const int k = trial % (n + 1);
    const ConstraintPlane L(n, random_isotropic(rng, n, k), 0.5 + 0.1 * (trial % 7));
    const NormReport r = gaussian_norm_closed_form(make_gaussian(random_a(rng, n), cplx(0.4, 1.2)), L);
    CHECK(r.rel_diff < 1e-10);
  }
}

TEST_CASE("inner product structure") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3;
    const int k = trial % (n + 1);
    const ConstraintPlane L(n, random_isotropic(rng, n, k));
    const QuasiGaussianState f = random_quasi(rng, n, trial % 3);
    const QuasiGaussianState g = random_quasi(rng, n, (trial + 1) % 3);
    const cplx fg = gaussian_inner_product(f, g, L);
    const cplx gf = gaussian_inner_product(g, f, L);
    const double scale = std::sqrt(std::abs(gaussian_inner_product(f, f, L) * gaussian_inner_product(g, g, L)));
    CHECK(std::abs(fg - std::conj(gf)) < 1e-10 * scale);
    CHECK(gaussian_inner_product(f, f, L).real() > -1e-10);
    CHECK(std::abs(gaussian_inner_product(f, f, L).imag()) < 1e-10 * scale);

    // Gauge invariance under shifts along L.
    if (k > 0) {
      const RVec x = L.basis() * random_rvec(rng, k, 0.8);
      CHECK(std::abs(gaussian_inner_product(weyl_apply(f, x), g, L) - fg) < 1e-9 * scale);
      // Null states.
      const auto nf = omega_op_apply(f, CVec(x.cast<cplx>()));
      CHECK(std::abs(gaussian_inner_product(nf, nf, L)) < 1e-9 * scale);
    }
    // Observables in the skew complement are Hermitian.
    const RMat comp = skew_complement(L.basis());
    const CVec y = (comp * random_rvec(rng, comp.cols())).cast<cplx>();
    const cplx lhs = gaussian_inner_product(omega_op_apply(f, y), g, L);
    const cplx rhs = gaussian_inner_product(f, omega_op_apply(g, y), L);
    CHECK(std::abs(lhs - rhs) < 1e-9 * std::max(1.0, scale));
  }
}

TEST_CASE("Gaussian equivalence") {
  const ConstraintPlane lp(1, RMat(unit(1, 1)));
  const GaussianState a = make_gaussian(ci(1));
  const auto same = gaussian_equivalent(a, a, lp);
  REQUIRE(same);
  CHECK(std::abs(same->c - 1.0) < 1e-12);

  const GaussianState b = make_gaussian(scalar(2.0 * I_unit));
  const auto ab = gaussian_equivalent(a, b, lp);
  REQUIRE(ab);
  // int exp(-xi^2/2) / int exp(-xi^2) = sqrt(2).
  CHECK(std::abs(ab->c - std::sqrt(2.0)) < 1e-12);
  CHECK(ab->residual < 1e-10 * std::abs(gaussian_inner_product(a, a, lp)));

  const ConstraintPlane l0(1, RMat(2, 0));
  CHECK_FALSE(gaussian_equivalent(a, b, l0));
}

TEST_CASE("Dirac projection examples") {
  const ConstraintPlane lp(1, RMat(unit(1, 1)));
  const ConstraintPlane lq(1, RMat(unit(1, 0)));
  const GaussianState psi = make_gaussian(scalar(cplx(0.2, 0.9)), cplx(1.1, 0.3));
  const cplx integral = psi.c * std::sqrt(kTwoPi / (-I_unit * psi.A(0, 0)));

  const DiracGaussian dp = dirac_project(psi, lp, find_gauge_surface(lp));
  CHECK(dp.regular);
  CHECK(std::abs(dp.A(0, 0)) < 1e-14);
  CHECK(std::abs(dp.c - integral) < 1e-12);
  CHECK(dp.route_mismatch < 1e-12);

  const DiracGaussian dq = dirac_project(psi, lq, find_gauge_surface(lq));
  CHECK_FALSE(dq.regular);
  CHECK(dq.delta_directions.cols() == 1);
  CHECK(dq.support.cols() == 0);
  CHECK(std::abs(dq.c - kTwoPi * psi.c) < 1e-12);

  for (double th : {0.3, 1.0, 2.5}) {
    const double pp = std::cos(th), qq = std::sin(th);
    const ConstraintPlane l(1, (RMat(2, 1) << pp, qq).finished());
    const DiracGaussian d = dirac_project(psi, l, find_gauge_surface(l));
    CHECK(std::abs(d.A(0, 0) - pp / qq) < 1e-12);
    CHECK(d.route_mismatch < 1e-12);
  }
}

TEST_CASE("Dirac inner product") {
  const ConstraintPlane lp(1, RMat(unit(1, 1)));
  const ConstraintPlane lq(1, RMat(unit(1, 0)));
  const GaussianState psi = make_gaussian(scalar(cplx(0.2, 0.9)), cplx(1.1, 0.3));
  const GaugeSurface gp = find_gauge_surface(lp);
  const DiracGaussian dp = dirac_project(psi, lp, gp);
  CHECK(std::abs(dirac_inner_product(dp, lp, gp).value - std::norm(dp.c)) < 1e-12);
  const GaugeSurface gq = find_gauge_surface(lq);
  const DiracGaussian dq = dirac_project(psi, lq, gq);
  RVec zero = RVec::Zero(1);
  const cplx psibar = std::sqrt(kTwoPi) * psi.evaluate(zero);
  CHECK(std::abs(dirac_inner_product(dq, lq, gq).value - std::norm(psibar)) < 1e-12);

  GaugeWeight w = default_gauge_weight(lp, gp);
  w.rho0 *= 2.0;
  CHECK_FALSE(dirac_inner_product(dp, lp, gp, w).rho_normalized);

  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 4;
    const int k = trial % (n + 1);
    RMat basis = random_isotropic(rng, n, k);
    if (trial % 5 == 1 && k > 0) {
      // Force a pure-momentum direction.
      basis = RMat::Zero(2 * n, k);
      for (int a = 0; a < k; ++a) basis(a, a) = 1.0;
      if (k < n) basis(n + k, 0) = 0.0;
    }
    const ConstraintPlane L(n, basis, 0.7);
    const GaugeSurface G = find_gauge_surface(L);
    const GaussianState s = make_gaussian(random_a(rng, n), random_cvec(rng, n, 0.4), cplx(0.5, 0.9));
    const DiracGaussian d = dirac_project(s, L, G);
    const double direct = gaussian_inner_product(s, s, L).real();
    const DiracNormReport rep = dirac_inner_product(d, L, G);
    CHECK(std::abs(rep.value - direct) < 1e-9 * direct);
    CHECK(rep.imag_residual < 1e-9 * direct);
    if (d.regular && s.b.norm() >= 0.0) CHECK(d.route_mismatch < 1e-9);
  }
}

TEST_CASE("reduction modulo null states") {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    const int k = trial % (n + 1);
    const ConstraintPlane L(n, random_isotropic(rng, n, k));
    const QuasiGaussianState f = random_quasi(rng, n, trial % 4);
    const QuasiGaussianState g = random_quasi(rng, n, 1);
    const QuasiGaussianState rf = reduce_modulo_null(f, L);
    const cplx before = gaussian_inner_product(g, f, L);
    const double scale = std::sqrt(std::abs(gaussian_inner_product(f, f, L) * gaussian_inner_product(g, g, L)));
    CHECK(std::abs(gaussian_inner_product(g, rf, L) - before) < 1e-10 * scale);
    if (k > 0) {
      QuasiGaussianState null_state = f;
      for (int a = 0; a < k; ++a) {
        const CVec x = L.basis().col(a).cast<cplx>();
        null_state = omega_op_apply(null_state, CVec(x * cplx(1.0 + a, 0.5)));
      }
      const QuasiGaussianState rn = reduce_modulo_null(null_state, L);
      CHECK(rn.poly.max_abs_coeff() < 1e-12 * std::max(1.0, null_state.poly.max_abs_coeff()));
    }
  }
}
