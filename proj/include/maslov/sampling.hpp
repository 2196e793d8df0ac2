#pragma once

#include <algorithm>
#include <random>

#include "maslov/dynamics.hpp"
#include "maslov/gaussian_state.hpp"
#include "maslov/linalg.hpp"
#include "maslov/symplectic.hpp"

/// Seeded random instances shared by the tests, the acceptance run and the
/// command line tool.
namespace maslov::sampling {

/// exp(J S) for a random symmetric S of the given spread.
inline RMat random_symplectic(std::mt19937_64& rng, int n, double spread = 0.25) {
  std::normal_distribution<double> nd;
  RMat s(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) s(i, j) = nd(rng);
  s = (spread * (s + s.transpose())).eval();
  const RMat m = linalg::symplectic_matrix(n) * s;
  RMat u = RMat::Identity(2 * n, 2 * n);
  RMat term = u;
  for (int p = 1; p < 40; ++p) {
    term = (term * m / p).eval();
    u += term;
  }
  return u;
}

/// Random isotropic k-plane: image of span{e_P1..e_Pk}.
inline RMat random_isotropic(std::mt19937_64& rng, int n, int k, double spread = 0.25) {
  return random_symplectic(rng, n, spread).leftCols(k);
}

/// Complex symmetric A with Im A eigenvalues in [lo, hi] and small Re A.
inline CMat random_a(std::mt19937_64& rng, int n, double lo = 0.6, double hi = 1.6, double re = 0.3) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(lo, hi);
  RMat g(n, n);
  for (int i = 0; i < g.size(); ++i) g.data()[i] = nd(rng);
  const RMat q = Eigen::HouseholderQR<RMat>(g).householderQ();
  RVec ev(n);
  for (int i = 0; i < n; ++i) ev(i) = ud(rng);
  const RMat s = q * ev.asDiagonal() * q.transpose();
  RMat r(n, n);
  for (int i = 0; i < r.size(); ++i) r.data()[i] = re * nd(rng);
  r = (0.5 * (r + r.transpose())).eval();
  CMat a(n, n);
  a.real() = r;
  a.imag() = s;
  return a;
}

inline CVec random_cvec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> nd;
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(scale * nd(rng), scale * nd(rng));
  return v;
}

inline RVec random_rvec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> nd;
  RVec v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * nd(rng);
  return v;
}

inline RMat random_symmetric(std::mt19937_64& rng, int n, double scale = 1.0) {
  const RMat g = RMat::NullaryExpr(n, n, [&]() { return std::normal_distribution<double>(0.0, scale)(rng); });
  return 0.5 * (g + g.transpose());
}

/// Positive definite with eigenvalues in [lo, hi].
inline RMat random_spd(std::mt19937_64& rng, int n, double lo, double hi) {
  const RMat q = Eigen::HouseholderQR<RMat>(random_symmetric(rng, n)).householderQ();
  RVec ev(n);
  for (int i = 0; i < n; ++i) ev(i) = std::uniform_real_distribution<double>(lo, hi)(rng);
  return q * ev.asDiagonal() * q.transpose();
}

/// Gamma built in the frame [X, Y, U] with vanishing gauge-gauge and
/// gauge-quotient blocks.  A traceless constraint-gauge block keeps the
/// reduced constant real.
inline RMat random_compatible(std::mt19937_64& rng, const ReducedSpace& R, double scale = 0.5,
                              bool real_shift = true, const RMat& uu = RMat()) {
  const int k = R.plane.k();
  const int n = R.plane.n();
  const int m2 = 2 * (n - k);
  auto nd = [&]() { return std::normal_distribution<double>(0.0, scale)(rng); };
  RMat gt = RMat::Zero(2 * n, 2 * n);
  gt.topLeftCorner(k, k) = random_symmetric(rng, k, scale);
  RMat xg = RMat::NullaryExpr(k, k, nd);
  if (real_shift && k > 0) xg(0, 0) -= xg.trace();
  gt.block(0, k, k, k) = xg;
  gt.block(k, 0, k, k) = xg.transpose();
  const RMat xu = RMat::NullaryExpr(k, m2, nd);
  gt.block(0, 2 * k, k, m2) = xu;
  gt.block(2 * k, 0, m2, k) = xu.transpose();
  gt.bottomRightCorner(m2, m2) = uu.size() > 0 ? uu : random_symmetric(rng, m2, scale);
  return R.frame * gt * R.frame.transpose();
}

/// Gaussian core with a product of `degree` random linear factors.
inline QuasiGaussianState random_quasi_gaussian(std::mt19937_64& rng, int n, int degree) {
  GaussianState g = make_gaussian(random_a(rng, n), random_cvec(rng, n, 0.3), cplx(0.8, 0.3));
  Polynomial p = Polynomial::constant(n, 1.0);
  for (int d = 0; d < degree; ++d) p = p * Polynomial::linear(random_cvec(rng, n, 0.7), cplx(0.6, -0.2));
  return QuasiGaussianState(g, p);
}

struct OracleInstance {
  ConstraintPlane plane;
  QuasiGaussianState f;
  QuasiGaussianState g;
};

/// n in [1, max_n], k in [0, min(n, max_k)], polynomial degrees in [0, 2].
inline OracleInstance random_oracle_instance(std::mt19937_64& rng, int max_n = 3, int max_k = 2) {
  const int n = std::uniform_int_distribution<int>(1, max_n)(rng);
  const int k = std::uniform_int_distribution<int>(0, std::min(n, max_k))(rng);
  std::uniform_int_distribution<int> deg(0, 2);
  OracleInstance out;
  out.plane = ConstraintPlane(n, random_isotropic(rng, n, k, 0.15));
  const int df = deg(rng);
  const int dg = deg(rng);
  out.f = random_quasi_gaussian(rng, n, df);
  out.g = random_quasi_gaussian(rng, n, dg);
  return out;
}

}  // namespace maslov::sampling
