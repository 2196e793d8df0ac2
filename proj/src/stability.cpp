#include "maslov/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "maslov/inner_product.hpp"
#include "maslov/linalg.hpp"
#include "maslov/polynomial.hpp"

namespace maslov {

namespace {

struct Cluster {
  cplx lambda;
  int algebraic = 0;
  int geometric = 0;
};

double generator_scale(const RMat& g) { return std::max(1.0, g.cwiseAbs().maxCoeff()); }

std::vector<Cluster> eigen_clusters(const RMat& g, double tol, std::vector<cplx>* spectrum) {
  const Eigen::EigenSolver<RMat> es(g, false);
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
    return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
  });
  if (spectrum) *spectrum = ev;
  const double scale = generator_scale(g);
  std::vector<Cluster> out;
  std::vector<bool> used(ev.size(), false);
  for (size_t i = 0; i < ev.size(); ++i) {
    if (used[i]) continue;
    cplx sum = 0.0;
    int count = 0;
    for (size_t j = i; j < ev.size(); ++j) {
      if (!used[j] && std::abs(ev[j] - ev[i]) <= tol * scale) {
        used[j] = true;
        sum += ev[j];
        ++count;
      }
    }
    Cluster c;
    c.lambda = sum / static_cast<double>(count);
    c.algebraic = count;
    const CMat shifted = g.cast<cplx>() - c.lambda * CMat::Identity(g.rows(), g.cols());
    const Eigen::JacobiSVD<CMat> svd(shifted);
    const auto& s = svd.singularValues();
    c.geometric = static_cast<int>((s.array() <= tol * scale).count());
    out.push_back(c);
  }
  return out;
}

/// Columns spanning ker(g - lambda) from the trailing right singular vectors.
CMat eigenspace(const RMat& g, cplx lambda, int dim) {
  const CMat shifted = g.cast<cplx>() - lambda * CMat::Identity(g.rows(), g.cols());
  const Eigen::JacobiSVD<CMat> svd(shifted, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(dim);
}

CMat krein_gram(const CMat& y) {
  const RMat j = linalg::symplectic_matrix(half_dim(y.rows()));
  const CMat k = (y.transpose() * j.cast<cplx>() * y.conjugate()) / I_unit;
  return 0.5 * (k + k.adjoint());
}

/// Rotates the largest component (first on ties) to the positive real axis.
void fix_phase(CMat& y) {
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 1; r < y.rows(); ++r)
      if (std::abs(y(r, c)) > std::abs(y(best, c)) * (1.0 + 1e-12)) best = r;
    const cplx z = y(best, c);
    if (std::abs(z) > 0.0) y.col(c) *= std::conj(z) / std::abs(z);
  }
}

}  // namespace

StabilityReport analyze_stability(const RMat& gamma_bar, double tol) {
  if (gamma_bar.rows() != gamma_bar.cols() || gamma_bar.rows() % 2 != 0)
    fail_validation("bad_gamma", "reduced form must be 2m x 2m");
  StabilityReport rep;
  if (gamma_bar.rows() == 0) {
    rep.stable = true;
    rep.diagonalizable = true;
    rep.reason = "trivial quotient";
    return rep;
  }
  const RMat g = circ_generator(gamma_bar);
  const double scale = generator_scale(g);
  const std::vector<Cluster> clusters = eigen_clusters(g, tol, &rep.spectrum);
  rep.diagonalizable = true;
  bool on_axis = true;
  for (const Cluster& c : clusters) {
    const bool defective = c.geometric < c.algebraic;
    const bool off_axis = std::abs(c.lambda.real()) > tol * scale;
    if (defective) rep.diagonalizable = false;
    if (off_axis) on_axis = false;
    if (std::abs(c.lambda) <= tol * scale) rep.zero_mode = true;
    if (defective || off_axis)
      for (int i = 0; i < c.algebraic; ++i) rep.offending.push_back(c.lambda);
  }
  rep.stable = on_axis && rep.diagonalizable;
  if (rep.stable)
    rep.reason = "spectrum on the imaginary axis and diagonalizable";
  else if (!on_axis)
    rep.reason = "eigenvalue off the imaginary axis";
  else
    rep.reason = "Jordan block on the imaginary axis";
  return rep;
}

ModeSet extract_modes(const RMat& gamma_bar, const ReducedSpace& R, double tol) {
  if (gamma_bar.rows() != R.U.cols()) fail_validation("basis_mismatch", "reduced form and quotient basis disagree");
  const StabilityReport rep = analyze_stability(gamma_bar, tol);
  if (!rep.stable) throw UnstableError(rep);
  if (rep.zero_mode) fail_unsupported("zero_mode", "zero frequency modes are not supported");
  const int m = R.m();
  ModeSet out;
  out.beta.resize(m);
  out.quotient.resize(2 * m, m);
  if (m == 0) {
    out.modes = CMat(R.U.rows(), 0);
    return out;
  }
  const RMat g = circ_generator(gamma_bar);
  std::vector<std::pair<double, CVec>> found;
  for (const Cluster& c : eigen_clusters(g, tol, nullptr)) {
    if (c.lambda.imag() <= 0.0) continue;
    CMat y = eigenspace(g, c.lambda, c.algebraic);
    double beta = c.lambda.imag();
    Eigen::SelfAdjointEigenSolver<CMat> ks(krein_gram(y));
    if (ks.eigenvalues().maxCoeff() < -1e-8) {
      y = y.conjugate().eval();
      beta = -beta;
      ks.compute(krein_gram(y));
    }
    if (ks.eigenvalues().minCoeff() <= 1e-8)
      fail_unsupported("mixed_krein", "eigenspace has indefinite Krein signature (resonant modes)");
    // C = conj(V) D^{-1/2} makes the Krein Gram of y C the identity.
    const CMat cmat = ks.eigenvectors().conjugate() * ks.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal();
    CMat yn = y * cmat;
    fix_phase(yn);
    for (Eigen::Index j = 0; j < yn.cols(); ++j) found.emplace_back(beta, yn.col(j));
  }
  if (static_cast<int>(found.size()) != m) fail_numerical("mode_count", "wrong number of normal modes");
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (int i = 0; i < m; ++i) {
    out.beta(i) = found[i].first;
    out.quotient.col(i) = found[i].second;
  }
  const RMat jm = linalg::symplectic_matrix(m);
  const double norm_err = (krein_gram(out.quotient) - CMat::Identity(m, m)).cwiseAbs().maxCoeff();
  const double iso_err = (out.quotient.transpose() * jm.cast<cplx>() * out.quotient).cwiseAbs().maxCoeff();
  if (norm_err > 1e-10 || iso_err > 1e-10)
    fail_numerical("mode_normalization", "normal modes fail the normalization checks");
  out.modes = R.U.cast<cplx>() * out.quotient;
  return out;
}

ComplexGerm germ_from_modes(const ModeSet& modes, const ConstraintPlane& L) {
  if (modes.modes.rows() != 2 * L.n() || modes.modes.cols() != L.n() - L.k())
    fail_validation("dimension_mismatch", "mode set and plane disagree");
  ComplexGerm g;
  g.flavor = GermFlavor::H;
  g.plane = L;
  g.basis.resize(2 * L.n(), L.n());
  g.basis << modes.modes, L.basis().cast<cplx>();
  const GermReport rep = check_germ(g);
  if (!rep.pass) fail_validation("bad_modes", "modes do not form an H-germ: " + rep.message);
  return g;
}

double verify_eigen(const QuadraticHamiltonian& H, const ConstraintPlane& L, const QuasiGaussianState& psi,
                    cplx energy) {
  const QuasiGaussianState hpsi = apply_hamiltonian(H.gamma, H.epsilon, psi);
  const QuasiGaussianState r =
      reduce_modulo_null(QuasiGaussianState(psi.gaussian, hpsi.poly - psi.poly * energy), L);
  return std::sqrt(std::max(0.0, gaussian_inner_product(r, r, L).real()));
}

GroundState ground_state(const QuadraticHamiltonian& H, const ConstraintPlane& L, double tol) {
  GroundState out{GaussianState(), 0.0, ModeSet(), reduce_hamiltonian(H, L), 0.0};
  const StabilityReport rep = analyze_stability(out.reduction.gamma_bar);
  if (!rep.stable) throw UnstableError(rep);
  out.modes = extract_modes(out.reduction.gamma_bar, out.reduction.space);
  const CMat a = h_germ_to_matrix(germ_from_modes(out.modes, L), L);
  GaussianState psi = make_gaussian(a, 1.0, 1e-8);
  const double norm = gaussian_inner_product(psi, psi, L).real();
  psi.c = 1.0 / std::sqrt(norm);
  out.state = psi;
  out.energy = out.reduction.epsilon_prime + 0.5 * out.modes.beta.sum();
  out.residual = verify_eigen(H, L, QuasiGaussianState(psi), out.energy);
  if (!(out.residual <= tol)) fail_numerical("eigen_residual", "ground state fails the eigenvalue check");
  return out;
}

ExcitedState excited_state(const GroundState& ground, const std::vector<int>& occupation) {
  const Eigen::Index m = ground.modes.modes.cols();
  if (static_cast<Eigen::Index>(occupation.size()) != m)
    fail_validation("dimension_mismatch", "occupation needs one entry per mode");
  if (std::any_of(occupation.begin(), occupation.end(), [](int v) { return v < 0; }))
    fail_validation("negative_occupation", "occupation numbers must be non-negative");
  if (std::accumulate(occupation.begin(), occupation.end(), 0) > kMaxPolyDegree)
    fail_validation("degree_cap", "total occupation exceeds the polynomial degree cap");
  ExcitedState out;
  out.occupation = occupation;
  out.state = QuasiGaussianState(ground.state);
  out.energy = ground.energy;
  for (Eigen::Index i = 0; i < m; ++i) {
    const CVec raise = ground.modes.modes.col(i).conjugate();
    for (int e = 0; e < occupation[i]; ++e) out.state = omega_op_apply(out.state, raise);
    out.energy += static_cast<double>(occupation[i]) * ground.modes.beta(i);
  }
  return out;
}

std::vector<SpectrumLevel> spectrum_below(const GroundState& ground, double bound, std::size_t max_levels) {
  const RVec& beta = ground.modes.beta;
  if (beta.size() > 0 && beta.minCoeff() <= 0.0)
    fail_unsupported("unbounded_spectrum", "a non-positive frequency makes the level set unbounded");
  std::vector<SpectrumLevel> out;
  const double budget = bound - ground.energy.real();
  if (budget < 0.0) return out;
  std::vector<int> occ(beta.size(), 0);
  std::function<void(Eigen::Index, double)> rec = [&](Eigen::Index i, double left) {
    if (i == beta.size()) {
      if (out.size() >= max_levels) fail_validation("too_many_levels", "level count exceeds the limit");
      SpectrumLevel lvl;
      lvl.occupation = occ;
      lvl.energy = ground.energy;
      for (Eigen::Index j = 0; j < beta.size(); ++j) lvl.energy += static_cast<double>(occ[j]) * beta(j);
      out.push_back(lvl);
      return;
    }
    for (occ[i] = 0; occ[i] * beta(i) <= left * (1.0 + 1e-12); ++occ[i]) rec(i + 1, left - occ[i] * beta(i));
    occ[i] = 0;
  };
  rec(0, budget);
  std::stable_sort(out.begin(), out.end(), [](const SpectrumLevel& a, const SpectrumLevel& b) {
    return a.energy.real() != b.energy.real() ? a.energy.real() < b.energy.real() : a.occupation < b.occupation;
  });
  return out;
}

}  // namespace maslov
