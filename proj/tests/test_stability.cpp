#include <cmath>
#include <random>

#include "doctest.h"
#include "maslov/inner_product.hpp"
#include "maslov/linalg.hpp"
#include "maslov/stability.hpp"
#include "test_util.hpp"

using namespace maslov;
using testutil::random_compatible;
using testutil::random_isotropic;
using testutil::random_rvec;
using testutil::random_spd;
using testutil::random_symmetric;
using testutil::unit;

namespace {

RMat diag(std::initializer_list<double> v) {
  RVec d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

bool has_eigenvalue(const StabilityReport& r, cplx z) {
  for (cplx e : r.spectrum)
    if (std::abs(e - z) < 1e-10) return true;
  return false;
}

}  // namespace

TEST_CASE("stability examples") {
  const StabilityReport osc = analyze_stability(diag({1, 1}));
  CHECK(osc.stable);
  CHECK(osc.diagonalizable);
  CHECK(has_eigenvalue(osc, I_unit));
  CHECK(has_eigenvalue(osc, -I_unit));

  const StabilityReport inv = analyze_stability(diag({1, -1}));
  CHECK_FALSE(inv.stable);
  CHECK(has_eigenvalue(inv, 1.0));
  CHECK(has_eigenvalue(inv, -1.0));
  CHECK(inv.offending.size() == 2);

  const StabilityReport free = analyze_stability(diag({1, 0}));
  CHECK_FALSE(free.stable);
  CHECK_FALSE(free.diagonalizable);
  CHECK(free.zero_mode);

  const StabilityReport zero = analyze_stability(RMat::Zero(2, 2));
  CHECK(zero.stable);
  CHECK(zero.zero_mode);
  CHECK(analyze_stability(RMat(0, 0)).stable);
}

TEST_CASE("normal modes") {
  const ConstraintPlane l0(1, RMat(2, 0));
  const ReducedSpace r1 = make_reduced_space(l0);
  const RMat g1 = diag({1, 1});
  // The frame may rotate the quotient basis, so express Gamma in it.
  const RMat gb1 = r1.U.transpose() * g1 * r1.U;
  const ModeSet m1 = extract_modes(gb1, r1);
  REQUIRE(m1.beta.size() == 1);
  CHECK(m1.beta(0) == doctest::Approx(1.0).epsilon(1e-12));
  CVec expect(2);
  expect << I_unit, 1.0;
  CHECK(linalg::span_distance(m1.modes, expect) < 1e-12);
  const CMat kg = omega_gram(m1.modes, CMat(m1.modes.conjugate())) / I_unit;
  CHECK(std::abs(kg(0, 0) - 1.0) < 1e-12);

  const ConstraintPlane l2(2, RMat(4, 0));
  const ReducedSpace r2 = make_reduced_space(l2);
  for (const RMat& g : {diag({1, 2, 1, 2}), diag({1, 1, 1, 1})}) {
    const ModeSet m = extract_modes(RMat(r2.U.transpose() * g * r2.U), r2);
    REQUIRE(m.beta.size() == 2);
    CHECK(m.beta(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(m.beta(1) == doctest::Approx(g(1, 1)).epsilon(1e-10));
    const CMat k = omega_gram(m.modes, CMat(m.modes.conjugate())) / I_unit;
    CHECK((k - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(omega_gram(m.modes, m.modes).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Negative definite: the positive Krein member has negative frequency.
  const ModeSet neg = extract_modes(RMat(-gb1), r1);
  CHECK(neg.beta(0) == doctest::Approx(-1.0).epsilon(1e-12));

  CHECK_THROWS_AS(extract_modes(RMat(r1.U.transpose() * diag({1, -1}) * r1.U), r1), UnstableError);
  try {
    extract_modes(RMat::Zero(2, 2), r1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unsupported);
  }
  // Resonant modes of opposite signature.
  try {
    extract_modes(RMat(r2.U.transpose() * diag({1, -1, 1, -1}) * r2.U), r2);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "mixed_krein");
  }
}

TEST_CASE("germ from modes") {
  const ConstraintPlane l0(1, RMat(2, 0));
  const ReducedSpace r0 = make_reduced_space(l0);
  const ModeSet m0 = extract_modes(RMat(r0.U.transpose() * diag({1, 1}) * r0.U), r0);
  const ComplexGerm g0 = germ_from_modes(m0, l0);
  CHECK(linalg::span_distance(g0.basis, s_germ(CMat::Constant(1, 1, I_unit)).basis) < 1e-12);

  const ConstraintPlane l1(2, RMat(unit(2, 0)));
  RMat gamma = RMat::Zero(4, 4);
  gamma(1, 1) = gamma(3, 3) = 1.0;
  const Reduction red = reduce_hamiltonian(make_hamiltonian(gamma), l1);
  const ModeSet m1 = extract_modes(red.gamma_bar, red.space);
  const ComplexGerm g1 = germ_from_modes(m1, l1);
  CMat expect(4, 2);
  expect << 0, 1, I_unit, 0, 0, 0, 1, 0;
  CHECK(linalg::span_distance(g1.basis, expect) < 1e-12);

  ModeSet bad = m1;
  bad.modes = bad.modes.conjugate().eval();
  CHECK_THROWS_AS(germ_from_modes(bad, l1), Error);
  ComplexGerm manual;
  manual.flavor = GermFlavor::H;
  manual.plane = l1;
  manual.basis.resize(4, 2);
  manual.basis << bad.modes, l1.basis().cast<cplx>();
  const GermReport rep = check_germ(manual);
  CHECK_FALSE(rep.pass);
  CHECK(rep.message == "positivity fails");
}

TEST_CASE("ground states") {
  const ConstraintPlane l0(1, RMat(2, 0));
  const GroundState osc = ground_state(make_hamiltonian(diag({1, 1})), l0);
  CHECK(std::abs(osc.state.A(0, 0) - I_unit) < 1e-12);
  CHECK(std::abs(osc.energy - 0.5) < 1e-12);
  CHECK(std::abs(gaussian_inner_product(osc.state, osc.state, l0) - 1.0) < 1e-12);

  const ConstraintPlane l1(2, RMat(unit(2, 0)));
  RMat gamma = RMat::Zero(4, 4);
  gamma(1, 1) = gamma(3, 3) = 1.0;
  gamma(0, 2) = gamma(2, 0) = 0.6;  // shifts the constant by 0.3 i
  gamma(0, 3) = gamma(3, 0) = 0.2;
  const QuadraticHamiltonian H = make_hamiltonian(gamma, 0.1);
  const GroundState gs = ground_state(H, l1);
  CHECK(std::abs(gs.energy - (0.5 + 0.1 + 0.3 * I_unit)) < 1e-12);
  CMat direct = CMat::Zero(2, 2);
  direct(0, 0) = cplx(0.4, 2.0);
  direct(1, 1) = I_unit;
  const auto eq = gaussian_equivalent(gs.state, make_gaussian(direct), l1);
  CHECK(eq.has_value());

  try {
    ground_state(make_hamiltonian(diag({1, -1})), l0);
    CHECK(false);
  } catch (const UnstableError& e) {
    CHECK_FALSE(e.report().stable);
    CHECK(e.report().offending.size() == 2);
  }
}

TEST_CASE("excited states and eigen residuals") {
  const ConstraintPlane l0(1, RMat(2, 0));
  const GroundState osc = ground_state(make_hamiltonian(diag({1, 1})), l0);
  const ExcitedState e0 = excited_state(osc, {0});
  CHECK((e0.state.poly - Polynomial::constant(1, 1.0)).max_abs_coeff() == 0.0);
  const ExcitedState e1 = excited_state(osc, {1});
  CHECK(std::abs(e1.energy - 1.5) < 1e-12);
  CHECK(e1.state.poly.degree() == 1);
  CHECK(std::abs(e1.state.poly.coeff({0})) < 1e-14);
  CHECK(verify_eigen(make_hamiltonian(diag({1, 1})), l0, e1.state, e1.energy) < 1e-9);
  CHECK_THROWS_AS(excited_state(osc, {kMaxPolyDegree + 1}), Error);
  CHECK_THROWS_AS(excited_state(osc, {-1}), Error);

  const QuadraticHamiltonian h1 = make_hamiltonian(diag({1, 1}));
  const QuasiGaussianState g(osc.state);
  CHECK(verify_eigen(h1, l0, g, osc.energy) < 1e-9);
  CHECK(verify_eigen(h1, l0, g, osc.energy + 0.1) == doctest::Approx(0.1).epsilon(1e-9));

  // Null component along the constraint.
  const ConstraintPlane l1(2, RMat(unit(2, 0)));
  RMat gamma = RMat::Zero(4, 4);
  gamma(1, 1) = gamma(3, 3) = 1.0;
  gamma(0, 0) = 0.5;
  const QuadraticHamiltonian H = make_hamiltonian(gamma);
  const GroundState gs = ground_state(H, l1);
  const QuasiGaussianState base(gs.state);
  const QuasiGaussianState null_part = omega_op_apply(base, CVec(unit(2, 0).cast<cplx>()));
  const QuasiGaussianState with_null(base.gaussian, base.poly + null_part.poly * cplx(0.7, 0.2));
  const double r0 = verify_eigen(H, l1, base, gs.energy + 0.1);
  CHECK(verify_eigen(H, l1, with_null, gs.energy + 0.1) == doctest::Approx(r0).epsilon(1e-9));
}

TEST_CASE("excited family is orthogonal with additive energies") {
  const ConstraintPlane l1(3, RMat(unit(3, 0)));
  RMat gamma = RMat::Zero(6, 6);
  gamma(1, 1) = 1.0;
  gamma(4, 4) = 1.0;
  gamma(2, 2) = 2.0;
  gamma(5, 5) = 2.0;
  gamma(1, 2) = gamma(2, 1) = 0.3;
  const QuadraticHamiltonian H = make_hamiltonian(gamma, 0.05);
  const GroundState gs = ground_state(H, l1);
  std::vector<ExcitedState> family;
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; a + b <= 3; ++b) family.push_back(excited_state(gs, {a, b}));
  for (size_t i = 0; i < family.size(); ++i) {
    const double ni = gaussian_inner_product(family[i].state, family[i].state, l1).real();
    CHECK(ni > 0.5);
    CHECK(verify_eigen(H, l1, family[i].state, family[i].energy) < 1e-8 * std::sqrt(ni));
    const cplx shift = family[i].energy - gs.energy;
    CHECK(std::abs(shift - (family[i].occupation[0] * gs.modes.beta(0) +
                            family[i].occupation[1] * gs.modes.beta(1))) < 1e-13);
    for (size_t j = i + 1; j < family.size(); ++j) {
      const double nj = gaussian_inner_product(family[j].state, family[j].state, l1).real();
      CHECK(std::abs(gaussian_inner_product(family[i].state, family[j].state, l1)) < 1e-8 * std::sqrt(ni * nj));
    }
  }
  const std::vector<SpectrumLevel> levels = spectrum_below(gs, gs.energy.real() + 2.0 * gs.modes.beta(0) + 1e-9);
  CHECK(levels.size() >= 3);
  CHECK(levels.front().occupation == std::vector<int>{0, 0});
  for (size_t i = 1; i < levels.size(); ++i) CHECK(levels[i].energy.real() >= levels[i - 1].energy.real());
}

TEST_CASE("ground states exist exactly for stable random compatible systems") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 4;
    const int k = std::min(trial % 3, n - 1);
    const ConstraintPlane L(n, random_isotropic(rng, n, k));
    const ReducedSpace R = make_reduced_space(L);
    const int m2 = 2 * (n - k);
    const RMat uu = random_spd(rng, m2, 0.4, 2.0) * (trial % 5 == 4 ? -1.0 : 1.0);
    const QuadraticHamiltonian H = make_hamiltonian(random_compatible(rng, R, 0.4, true, uu), 0.2, 1e-10);
    const GroundState gs = ground_state(H, L);
    CHECK(analyze_stability(gs.reduction.gamma_bar).stable);
    CHECK(gs.residual < 1e-8);
    const CMat k2 = omega_gram(gs.modes.modes, CMat(gs.modes.modes.conjugate())) / I_unit;
    CHECK((k2 - CMat::Identity(n - k, n - k)).cwiseAbs().maxCoeff() < 1e-10);
  }
  // Forward direction: success implies stability.
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 3;
    const int k = trial % n;
    const ConstraintPlane L(n, random_isotropic(rng, n, k));
    const ReducedSpace R = make_reduced_space(L);
    const QuadraticHamiltonian H = make_hamiltonian(random_compatible(rng, R, 0.8, true), 0.0, 1e-10);
    try {
      const GroundState gs = ground_state(H, L);
      CHECK(analyze_stability(gs.reduction.gamma_bar).stable);
    } catch (const UnstableError& e) {
      CHECK_FALSE(e.report().stable);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Unsupported);
    }
  }
}
