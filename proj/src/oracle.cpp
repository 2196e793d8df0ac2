#include "maslov/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Sparse>

namespace maslov {

namespace {

using Point = std::array<cplx, 3>;
using PointFn = std::function<cplx(const cplx*)>;
using SpMat = Eigen::SparseMatrix<cplx>;

constexpr int kMaxBasisLevel = 256;

/// Gaussian part exp(i/2 z^T A z + i b^T z) of a state, used only to place
/// nodes and contours.
struct Envelope {
  CMat A;
  CVec b;
};

Envelope envelope_of(const GaussianState& g) { return {g.A, g.b}; }

/// Flattened quasi-Gaussian, evaluated at complex points.
class FastState {
 public:
  FastState(const CMat& a, const CVec& b, cplx c, const Polynomial& poly)
      : a_(a), b_(b), c_(c), n_(static_cast<int>(a.rows())), deg_(std::max(0, poly.degree())) {
    if (n_ > 3) fail_validation("cost_guard", "pointwise oracle supports n <= 3");
    for (const auto& [alpha, coef] : poly.terms()) {
      std::array<int, 3> e{};
      for (int i = 0; i < n_; ++i) e[i] = alpha[i];
      exps_.push_back(e);
      coefs_.push_back(coef);
    }
  }

  static FastState of(const QuasiGaussianState& s) {
    return FastState(s.gaussian.A, s.gaussian.b, s.gaussian.c, s.poly);
  }

  /// The entire function equal to conj(s(xi)) on real xi.
  static FastState conjugate_of(const QuasiGaussianState& s) {
    return FastState(-s.gaussian.A.conjugate(), -s.gaussian.b.conjugate(), std::conj(s.gaussian.c), s.poly.conj());
  }

  cplx operator()(const cplx* z) const { return c_ * poly(z) * std::exp(I_unit * exponent(z)); }

  const CMat& a() const { return a_; }
  const CVec& b() const { return b_; }
  cplx c() const { return c_; }

  cplx poly(const cplx* z) const {
    if (deg_ == 0) return coefs_.empty() ? cplx(0.0) : coefs_[0];
    cplx p = 0.0;
    for (std::size_t t = 0; t < exps_.size(); ++t) {
      cplx mono = coefs_[t];
      for (int i = 0; i < n_; ++i)
        for (int d = 0; d < exps_[t][i]; ++d) mono *= z[i];
      p += mono;
    }
    return p;
  }

 private:
  CMat a_;
  CVec b_;
  cplx c_;
  int n_;
  int deg_;
  std::vector<std::array<int, 3>> exps_;
  std::vector<cplx> coefs_;

  cplx exponent(const cplx* z) const {
    cplx e = 0.0;
    for (int i = 0; i < n_; ++i) {
      cplx row = 0.5 * a_(i, i) * z[i];
      for (int j = i + 1; j < n_; ++j) row += a_(i, j) * z[j];
      e += z[i] * (row + b_(i));
    }
    return e;
  }
};

/// phi_0..phi_N of frequency w at x (real or complex).
template <typename T>
void hermite_functions(T x, int nmax, double w, T* out) {
  const T s = std::sqrt(w) * x;
  out[0] = std::pow(w / kPi, 0.25) * std::exp(-0.5 * s * s);
  if (nmax >= 1) out[1] = std::sqrt(2.0) * s * out[0];
  for (int a = 1; a < nmax; ++a)
    out[a + 1] = std::sqrt(2.0 / (a + 1)) * s * out[a] - std::sqrt(static_cast<double>(a) / (a + 1)) * out[a - 1];
}

/// sum_a c_a phi_a(z), or sum_a conj(c_a) phi_a(z) for the continuation of
/// the conjugate.
cplx basis_value(const BasisState& s, const cplx* z, bool conjugate) {
  const int d = s.n_max + 1;
  std::array<cplx, 2 * (kMaxBasisLevel + 1)> tab;
  for (int j = 0; j < s.n; ++j) hermite_functions<cplx>(z[j], s.n_max, s.omega(j), tab.data() + j * d);
  auto coef = [&](Eigen::Index i) { return conjugate ? std::conj(s.coeffs(i)) : s.coeffs(i); };
  if (s.n == 1) {
    cplx v = 0.0;
    for (int a = 0; a < d; ++a) v += coef(a) * tab[a];
    return v;
  }
  if (s.n != 2) fail_validation("cost_guard", "basis states support n <= 2");
  cplx v = 0.0;
  for (int b = 0; b < d; ++b) {
    cplx row = 0.0;
    for (int a = 0; a < d; ++a) row += coef(a + d * b) * tab[a];
    v += row * tab[d + b];
  }
  return v;
}

struct SymEig {
  RMat v;
  RVec lambda;
};

SymEig sym_eig(const RMat& m) {
  const Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (m + m.transpose()));
  if (es.eigenvalues().size() > 0 && !(es.eigenvalues().minCoeff() > 0.0))
    fail_numerical("envelope", "quadrature envelope is not positive definite");
  return {es.eigenvectors(), es.eigenvalues()};
}

/// Tensor Gauss-Hermite nodes for exp(-1/2 z^T K z) with K complex
/// symmetric and Re K > 0.  The contour z = M y is rotated axis by axis so
/// that M^T K M = 2 I; the rotation angles stay below pi/4 and the square
/// roots are principal, so the deformation is continuous from the real
/// axis.  Weights carry exp(|y|^2) and the Jacobian.
struct NodeSet {
  int dim = 0;
  std::vector<cplx> offsets;  // dim entries per node
  std::vector<cplx> weights;
  std::vector<cplx> quad;     // 1/2 o^T A o for an optional shared A
  std::size_t size() const { return weights.size(); }
  const cplx* offset(std::size_t i) const { return offsets.data() + i * dim; }
};

NodeSet gaussian_nodes(const CMat& kmat, int m) {
  const int dim = static_cast<int>(kmat.rows());
  const SymEig es = sym_eig(kmat.real());
  const RMat root_inv = es.v * es.lambda.cwiseInverse().cwiseSqrt().asDiagonal() * es.v.transpose();
  const RMat c = root_inv * kmat.imag() * root_inv;
  const Eigen::SelfAdjointEigenSolver<RMat> ce(0.5 * (c + c.transpose()));
  CVec rot(dim);
  for (int j = 0; j < dim; ++j) rot(j) = 1.0 / std::sqrt(cplx(1.0, ce.eigenvalues()(j)));
  const CMat map = std::sqrt(2.0) * (root_inv * ce.eigenvectors()).cast<cplx>() * rot.asDiagonal();
  const cplx jac = std::pow(2.0, 0.5 * dim) / std::sqrt(es.lambda.prod()) * rot.prod();
  const GaussHermiteRule rule = gauss_hermite(m);
  std::size_t count = 1;
  for (int d = 0; d < dim; ++d) count *= static_cast<std::size_t>(m);
  NodeSet out;
  out.dim = dim;
  out.offsets.reserve(count * dim);
  out.weights.reserve(count);
  RVec y;
  double w = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    tensor_node(rule, dim, i, y, w, true);
    const CVec z = map * y.cast<cplx>();
    out.offsets.insert(out.offsets.end(), z.data(), z.data() + dim);
    out.weights.push_back(w * jac);
  }
  return out;
}

/// Trapezoid lattice in whitened coordinates u: x = x0 + T u.
struct ShiftLattice {
  RVec x0;
  RMat T;
  double jac = 1.0;
};

ShiftLattice whitened_lattice(const RMat& lambda, const RVec& x0) {
  const SymEig es = sym_eig(lambda);
  ShiftLattice lat;
  lat.x0 = x0;
  lat.T = es.v * es.lambda.cwiseInverse().cwiseSqrt().asDiagonal();
  lat.jac = std::abs(lat.T.determinant());
  return lat;
}

struct LatticeSum {
  cplx value;
  double mass = 0.0;
  bool boundary_ok = true;
};

/// h^k sum_u F(x0 + T u) over the cube |u_a| <= extent with spacing h.
LatticeSum lattice_sum(const ShiftLattice& lat, int k, double extent, double h,
                       const std::function<cplx(const RVec&)>& F, SumMode mode) {
  const int half = static_cast<int>(std::ceil(extent / h));
  const int side = 2 * half + 1;
  std::size_t count = 1;
  for (int a = 0; a < k; ++a) count *= static_cast<std::size_t>(side);
  auto coords = [&](std::size_t i, RVec& u, bool& edge) {
    u.resize(k);
    edge = false;
    for (int a = 0; a < k; ++a) {
      const int j = static_cast<int>(i % side);
      i /= side;
      u(a) = (j - half) * h;
      if (j == 0 || j == side - 1) edge = true;
    }
  };
  std::vector<cplx> values;
  evaluate_terms(
      count,
      [&](std::size_t i) {
        RVec u;
        bool edge = false;
        coords(i, u, edge);
        return F(lat.x0 + lat.T * u);
      },
      values, mode);
  double top = 0.0;
  double edge_top = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    RVec u;
    bool edge = false;
    coords(i, u, edge);
    const double a = std::abs(values[i]);
    top = std::max(top, a);
    mass += a;
    if (edge) edge_top = std::max(edge_top, a);
  }
  const double vol = std::pow(h, k) * lat.jac;
  LatticeSum out;
  out.value = sum_values(values, mode) * vol;
  out.mass = mass * vol;
  out.boundary_ok = !(edge_top > 1e-13 * top);
  return out;
}

void check_grid(const GridSpec& grid) {
  if (grid.nodes < 16) fail_validation("bad_grid", "at least 16 nodes per axis are required");
  if (!(grid.shift_density > 0.0) || !(grid.shift_extent > 0.0))
    fail_validation("bad_grid", "shift lattice density and extent must be positive");
  if (grid.max_doublings < 1 || grid.max_doublings > 4)
    fail_validation("bad_grid", "between 1 and 4 doublings are allowed");
}

/// exp(i P.z - i/2 P.Q) g(z - Q) for X = (P, Q).
PointFn shifted_point(const PointFn& g, const CVec& X) {
  const int n = static_cast<int>(X.size() / 2);
  Point p{};
  Point q{};
  cplx pq = 0.0;
  for (int i = 0; i < n; ++i) {
    p[i] = X(i);
    q[i] = X(n + i);
    pq += p[i] * q[i];
  }
  return [g, p, q, pq, n](const cplx* z) {
    Point zq{};
    cplx pz = 0.0;
    for (int i = 0; i < n; ++i) {
      pz += p[i] * z[i];
      zq[i] = z[i] - q[i];
    }
    return std::exp(I_unit * (pz - 0.5 * pq)) * g(zq.data());
  };
}

/// Integrand at node i of the contour through `saddle`.
using NodeFn = std::function<cplx(std::size_t i)>;
/// X -> the xi integrand conj f(xi) (exp(i Omega(X)) g)(xi), continued.
using ShiftedFn = std::function<NodeFn(const CVec& X, const NodeSet& nodes, const CVec& saddle)>;

/// Point evaluation at the nodes for integrands without shared structure.
NodeFn at_nodes(const PointFn& f, const NodeSet& nodes, const CVec& saddle) {
  return [f, &nodes, saddle](std::size_t i) {
    const cplx* off = nodes.offset(i);
    Point z{};
    for (int j = 0; j < nodes.dim; ++j) z[j] = saddle(j) + off[j];
    return f(z.data());
  };
}

/// Convergence bookkeeping shared by the refinement loops.
bool settled(cplx value, cplx prev, int level, double scale, const GridSpec& grid, OracleValue& out) {
  if (level == 0) return false;
  const double diff = std::abs(value - prev);
  if (diff > 0.1 * grid.rel_target * scale) return false;
  out.value = value;
  out.error = std::max(diff, 1e-16 * scale);
  out.doublings = level;
  return true;
}

/// int_L dmu(X) int dxi conj f(xi) (exp(i Omega(X)) g)(xi).  fbar is the
/// entire continuation of conj f.  For each shift the xi contour passes
/// through the saddle of the Gaussian envelopes, which removes the linear
/// oscillation; the remaining factor is integrated by Gauss-Hermite.
OracleValue shift_quadrature(const Envelope& ef, const ShiftedFn& integrand, const Envelope& eg,
                             const ConstraintPlane& L, const GridSpec& grid, int base_nodes,
                             const CMat& shared_quadratic = CMat(), bool hermite_shifts = false) {
  check_grid(grid);
  const int n = L.n();
  const int k = L.k();
  if (n > 3 || k > 2) fail_validation("cost_guard", "oracle quadrature is limited to n <= 3, k <= 2");
  const CMat kmat = -I_unit * (eg.A - ef.A.conjugate());
  const CMat kinv = kmat.inverse();
  const RMat xp = L.p_block();
  const RMat xq = L.q_block();
  const CVec bf = ef.b.conjugate();

  // After the xi integral the envelopes leave exp(-1/2 x^T Kx x + wx.x) in
  // the shift coordinates; Re Kx lays out the lattice, Kx the shift contour.
  CMat kx;
  CVec x0;
  ShiftLattice lat;
  if (k > 0) {
    const CMat mx = xp.cast<cplx>() - eg.A * xq.cast<cplx>();
    const CVec w0 = I_unit * (eg.b - bf);
    const RMat pq = xp.transpose() * xq;
    kx = mx.transpose() * kinv * mx - I_unit * (xq.transpose().cast<cplx>() * eg.A * xq.cast<cplx>() -
                                                (0.5 * (pq + pq.transpose())).cast<cplx>());
    kx = 0.5 * (kx + kx.transpose()).eval();
    const CVec wx = I_unit * (mx.transpose() * kinv * w0) - I_unit * (xq.transpose().cast<cplx>() * eg.b);
    x0 = kx.lu().solve(wx);
    const RMat lam = kx.real();
    lat = whitened_lattice(lam, lam.ldlt().solve(RVec(wx.real())));
  }

  OracleValue out;
  double extent = grid.shift_extent;
  cplx prev = 0.0;
  for (int level = 0; level <= grid.max_doublings; ++level) {
    NodeSet nodes = gaussian_nodes(kmat, base_nodes << level);
    const std::size_t nn = nodes.size();
    if (shared_quadratic.size() > 0) {
      nodes.quad.resize(nn);
      for (std::size_t i = 0; i < nn; ++i) {
        const Eigen::Map<const CVec> o(nodes.offset(i), n);
        nodes.quad[i] = 0.5 * (o.transpose() * shared_quadratic * o)(0);
      }
    }
    auto inner = [&](const CVec& x, SumMode mode) {
      const CVec X = L.basis().cast<cplx>() * x;
      const CVec bgx = eg.b - eg.A * X.tail(n) + X.head(n);
      const CVec saddle = kinv * (I_unit * (bgx - bf));
      const NodeFn g = integrand(X, nodes, saddle);
      return sum_terms(nn, [&](std::size_t i) { return nodes.weights[i] * g(i); }, mode);
    };
    cplx value;
    double mass = 0.0;
    if (k == 0) {
      value = inner(CVec(), grid.mode) * L.measure_scale();
      mass = std::abs(value);
    } else if (hermite_shifts) {
      const NodeSet outer = gaussian_nodes(kx, base_nodes << level);
      value = sum_terms(
                  outer.size(),
                  [&](std::size_t i) {
                    const CVec x = x0 + Eigen::Map<const CVec>(outer.offset(i), k);
                    return outer.weights[i] * inner(x, SumMode::Serial);
                  },
                  grid.mode) *
              L.measure_scale();
      mass = std::abs(value);
    } else {
      const double h = 1.0 / (grid.shift_density * std::pow(2.0, level));
      LatticeSum s;
      for (int widen = 0;; ++widen) {
        s = lattice_sum(lat, k, extent, h, [&](const RVec& x) { return inner(x.cast<cplx>(), SumMode::Serial); },
                        grid.mode);
        if (s.boundary_ok) break;
        if (widen == 4) fail_numerical("not_converged", "shift integrand does not decay on the lattice");
        extent *= 1.5;
      }
      value = s.value * L.measure_scale();
      mass = s.mass * L.measure_scale();
    }
    if (settled(value, prev, level, std::max(std::abs(value), 1e-3 * mass), grid, out)) {
      out.extent = hermite_shifts ? 0.0 : extent;
      return out;
    }
    prev = value;
  }
  fail_numerical("not_converged", "quadrature did not converge within the doubling budget");
}

// ---- truncated oscillator basis ----

std::size_t basis_size(int n, int nmax) {
  std::size_t s = 1;
  for (int j = 0; j < n; ++j) s *= static_cast<std::size_t>(nmax + 1);
  return s;
}

/// Omega(e_i) for i < 2n on levels 0..d-1 per mode.
std::vector<SpMat> phase_space_ops(int n, int d, const RVec& omega) {
  const std::size_t size = basis_size(n, d - 1);
  std::vector<SpMat> ops;
  for (int kind = 0; kind < 2; ++kind) {
    for (int j = 0; j < n; ++j) {
      std::vector<Eigen::Triplet<cplx>> trip;
      std::size_t stride = 1;
      for (int l = 0; l < j; ++l) stride *= static_cast<std::size_t>(d);
      const double w = omega(j);
      for (std::size_t idx = 0; idx < size; ++idx) {
        const int a = static_cast<int>((idx / stride) % d);
        // xi = (a + a^dag)/sqrt(2w); Omega(e_Q) = -p = -i sqrt(w/2)(a^dag - a)
        if (a + 1 < d) {
          const double up = std::sqrt(a + 1.0);
          const cplx v = kind == 0 ? cplx(up / std::sqrt(2.0 * w)) : -I_unit * std::sqrt(0.5 * w) * up;
          trip.emplace_back(static_cast<int>(idx + stride), static_cast<int>(idx), v);
        }
        if (a > 0) {
          const double down = std::sqrt(static_cast<double>(a));
          const cplx v = kind == 0 ? cplx(down / std::sqrt(2.0 * w)) : I_unit * std::sqrt(0.5 * w) * down;
          trip.emplace_back(static_cast<int>(idx - stride), static_cast<int>(idx), v);
        }
      }
      SpMat op(static_cast<int>(size), static_cast<int>(size));
      op.setFromTriplets(trip.begin(), trip.end());
      ops.push_back(op);
    }
  }
  return ops;
}

/// Injection of the levels a_j <= nmax into levels a_j <= big.
SpMat level_embedding(int n, int nmax, int big) {
  const std::size_t small = basis_size(n, nmax);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (std::size_t i = 0; i < small; ++i) {
    std::size_t rest = i;
    std::size_t target = 0;
    std::size_t stride = 1;
    for (int j = 0; j < n; ++j) {
      target += (rest % (nmax + 1)) * stride;
      rest /= (nmax + 1);
      stride *= static_cast<std::size_t>(big + 1);
    }
    trip.emplace_back(static_cast<int>(target), static_cast<int>(i), 1.0);
  }
  SpMat e(static_cast<int>(basis_size(n, big)), static_cast<int>(small));
  e.setFromTriplets(trip.begin(), trip.end());
  return e;
}

/// Omega_2(gamma) restricted to levels <= nmax.  Products are formed two
/// levels higher so that the restriction is exact.
SpMat quadratic_operator(const RMat& gamma, int n, int nmax, const RVec& omega) {
  const int d = nmax + 3;
  const std::vector<SpMat> ops = phase_space_ops(n, d, omega);
  const SpMat emb = level_embedding(n, nmax, nmax + 2);
  SpMat h(ops[0].rows(), ops[0].cols());
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j)
      if (gamma(i, j) != 0.0) h += SpMat(ops[i] * ops[j]) * cplx(0.5 * gamma(i, j));
  return SpMat(emb.transpose() * h * emb);
}

CVec taylor_propagate(const SpMat& h, const CVec& v0, double t, int& steps) {
  RVec rows = RVec::Zero(h.rows());
  for (int c = 0; c < h.outerSize(); ++c)
    for (SpMat::InnerIterator it(h, c); it; ++it) rows(it.row()) += std::abs(it.value());
  const double bound = rows.size() > 0 ? rows.maxCoeff() : 0.0;
  steps = std::max(1, static_cast<int>(std::ceil(bound * std::abs(t))));
  const cplx dt = -I_unit * (t / steps);
  CVec v = v0;
  for (int s = 0; s < steps; ++s) {
    CVec term = v;
    CVec acc = v;
    for (int order = 1;; ++order) {
      term = (h * term) * (dt / static_cast<double>(order));
      acc += term;
      if (term.norm() <= 1e-17 * acc.norm()) break;
      if (order > 200) fail_numerical("taylor", "Taylor series failed to converge");
    }
    v = acc;
  }
  return v;
}

struct Moments {
  RVec mean;
  RVec momentum;
  RMat cov;
  RMat cross;
};

Moments basis_moments(const BasisState& s) {
  const int n = s.n;
  const int d = s.n_max + 2;
  const std::vector<SpMat> ops = phase_space_ops(n, d, s.omega);
  const CVec v = level_embedding(n, s.n_max, s.n_max + 1) * s.coeffs;
  const double nrm = v.squaredNorm();
  std::vector<CVec> xv(n);
  std::vector<CVec> pv(n);
  Moments m;
  m.mean.resize(n);
  m.momentum.resize(n);
  for (int j = 0; j < n; ++j) {
    xv[j] = ops[j] * v;
    pv[j] = -(ops[n + j] * v);
    m.mean(j) = v.dot(xv[j]).real() / nrm;
    m.momentum(j) = v.dot(pv[j]).real() / nrm;
  }
  m.cov.resize(n, n);
  m.cross.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      m.cov(i, j) = xv[i].dot(xv[j]).real() / nrm - m.mean(i) * m.mean(j);
      m.cross(i, j) = xv[i].dot(pv[j]).real() / nrm - m.mean(i) * m.momentum(j);
    }
  return m;
}

/// Drops levels whose coefficients are below 1e-12 of the norm in every
/// mode, keeping at least 8.
BasisState trim_basis(const BasisState& s) {
  const int d = s.n_max + 1;
  const double floor = 1e-12 * s.norm();
  int top = 8;
  for (Eigen::Index i = 0; i < s.coeffs.size(); ++i) {
    if (std::abs(s.coeffs(i)) <= floor) continue;
    Eigen::Index rest = i;
    for (int j = 0; j < s.n; ++j) {
      top = std::max(top, static_cast<int>(rest % d));
      rest /= d;
    }
  }
  if (top >= s.n_max) return s;
  BasisState out = s;
  out.n_max = top;
  out.coeffs = level_embedding(s.n, top, s.n_max).transpose() * s.coeffs;
  return out;
}

Envelope envelope_of(const BasisState& s) {
  const Moments mo = basis_moments(s);
  const RMat cinv = mo.cov.inverse();
  const RMat S = 0.25 * (cinv + cinv.transpose());
  const RMat r = cinv * mo.cross;
  const RMat R = 0.5 * (r + r.transpose());
  Envelope e;
  e.A = R.cast<cplx>() + I_unit * S.cast<cplx>();
  e.b = (mo.momentum - R * mo.mean).cast<cplx>() - I_unit * (S * mo.mean).cast<cplx>();
  return e;
}

RVec default_omega(const RVec& omega, int n) {
  if (omega.size() == 0) return RVec::Ones(n);
  if (omega.size() != n) fail_validation("dimension_mismatch", "one reference frequency per mode is required");
  if (!(omega.minCoeff() > 0.0)) fail_validation("bad_frequency", "reference frequencies must be positive");
  return omega;
}
}  // namespace

OracleValue numeric_inner_product(const QuasiGaussianState& f, const QuasiGaussianState& g,
                                  const ConstraintPlane& L, const GridSpec& grid) {
  if (f.n() != L.n() || g.n() != L.n()) fail_validation("dimension_mismatch", "states and plane disagree on n");
  if (L.n() > 3 || L.k() > 2) fail_validation("cost_guard", "oracle quadrature is limited to n <= 3, k <= 2");
  const FastState fb = FastState::conjugate_of(f);
  // The shift changes only b, c and the polynomial, so the quadratic part of
  // the exponent at each node is shared by all shifts.
  const CMat shared = fb.a() + g.gaussian.A;
  const int n = L.n();
  const FastState g0 = FastState::of(g);
  const ShiftedFn pair = [&g0, &fb, &shared, n](const CVec& X, const NodeSet& nodes, const CVec& saddle) -> NodeFn {
    // exp(i P.z - i/2 P.Q) g(z - Q) keeps A and moves b, c and the polynomial.
    const CVec p = X.head(n);
    const CVec q = X.tail(n);
    const CVec bx = g0.b() - g0.a() * q + p;
    const cplx cx = g0.c() * std::exp(I_unit * (0.5 * (q.transpose() * g0.a() * q)(0) - (g0.b().transpose() * q)(0) -
                                                0.5 * (p.transpose() * q)(0)));
    const CVec b = fb.b() + bx;
    const CVec lin = shared * saddle + b;
    const cplx e0 = (0.5 * (saddle.transpose() * shared * saddle)(0) + (b.transpose() * saddle)(0));
    const cplx amp = fb.c() * cx;
    Point l{};
    Point zq0{};
    for (int j = 0; j < n; ++j) {
      l[j] = lin(j);
      zq0[j] = saddle(j) - q(j);
    }
    return [&g0, &fb, &nodes, saddle, l, zq0, e0, amp, n](std::size_t i) {
      const cplx* off = nodes.offset(i);
      Point z{};
      Point zq{};
      cplx e = e0 + nodes.quad[i];
      for (int j = 0; j < n; ++j) {
        z[j] = saddle(j) + off[j];
        zq[j] = zq0[j] + off[j];
        e += l[j] * off[j];
      }
      return amp * fb.poly(z.data()) * g0.poly(zq.data()) * std::exp(I_unit * e);
    };
  };
  return shift_quadrature(envelope_of(f.gaussian), pair, envelope_of(g.gaussian), L, grid, grid.nodes, shared, true);
}

OracleValue numeric_inner_product(const BasisState& f_full, const BasisState& g_full, const ConstraintPlane& L,
                                  const GridSpec& grid) {
  if (f_full.n != L.n() || g_full.n != L.n()) fail_validation("dimension_mismatch", "states and plane disagree on n");
  const BasisState f = trim_basis(f_full);
  const BasisState g = trim_basis(g_full);
  const PointFn fp = [&f](const cplx* z) { return basis_value(f, z, true); };
  const PointFn gp = [&g](const cplx* z) { return basis_value(g, z, false); };
  const ShiftedFn pair = [fp, gp](const CVec& X, const NodeSet& nodes, const CVec& saddle) {
    const PointFn gx = shifted_point(gp, X);
    return at_nodes([fp, gx](const cplx* z) { return fp(z) * gx(z); }, nodes, saddle);
  };
  // Products of levels up to N need about N nodes per axis.
  const int base = std::max(grid.nodes, std::max(f.n_max, g.n_max) + 8);
  return shift_quadrature(envelope_of(f), pair, envelope_of(g), L, grid, base);
}

DiracSamples numeric_dirac_project(const GaussianState& psi, const ConstraintPlane& L,
                                   const std::vector<RVec>& points, const GridSpec& grid) {
  check_grid(grid);
  const int n = L.n();
  const int k = L.k();
  if (psi.n() != n) fail_validation("dimension_mismatch", "state and plane disagree on n");
  if (n > 3 || k > 2) fail_validation("cost_guard", "oracle quadrature is limited to n <= 3, k <= 2");
  if (!L.q_projectable()) fail_unsupported("delta_case", "the shift integral is singular when X_Q is not injective");
  const CMat xp = L.p_block().cast<cplx>();
  const CMat xq = L.q_block().cast<cplx>();
  // The x integrand is exp(-1/2 x^T Kx x + w(xi).x) times a constant.
  const CMat kx = -I_unit * (xq.transpose() * psi.A * xq - 0.5 * (xp.transpose() * xq + xq.transpose() * xp));
  const CMat kx_inv = kx.inverse();
  const FastState fs = FastState::of(QuasiGaussianState(psi));
  const PointFn pf = [fs](const cplx* z) { return fs(z); };
  DiracSamples out;
  out.points = points;
  out.values.resize(points.size());
  for (std::size_t s = 0; s < points.size(); ++s) {
    if (points[s].size() != n) fail_validation("dimension_mismatch", "sample points must have length n");
    const CVec xi = points[s].cast<cplx>();
    const CVec saddle = kx_inv * (I_unit * (xp.transpose() * xi - xq.transpose() * (psi.A * xi + psi.b)));
    OracleValue v;
    cplx prev = 0.0;
    bool done = false;
    for (int level = 0; level <= grid.max_doublings && !done; ++level) {
      const NodeSet nodes = gaussian_nodes(kx, grid.nodes << level);
      const cplx val = L.measure_scale() * sum_terms(
                                               nodes.size(),
                                               [&](std::size_t i) {
                                                 const CVec x = saddle + Eigen::Map<const CVec>(nodes.offset(i), k);
                                                 const CVec X = L.basis().cast<cplx>() * x;
                                                 return nodes.weights[i] * shifted_point(pf, X)(xi.data());
                                               },
                                               grid.mode);
      done = settled(val, prev, level, std::abs(val), grid, v);
      prev = val;
    }
    if (!done) fail_numerical("not_converged", "shift integral did not converge at a sample point");
    out.values[s] = v.value;
    out.error = std::max(out.error, v.error);
  }
  return out;
}

OracleValue numeric_pairing_constant(const ConstraintPlane& L, const GaugeSurface& G, const RMat& precision,
                                     const GridSpec& grid) {
  check_grid(grid);
  const int k = L.k();
  if (k > 2) fail_validation("cost_guard", "oracle quadrature is limited to k <= 2");
  if (G.basis.cols() != k || G.basis.rows() != 2 * L.n())
    fail_validation("dimension_mismatch", "gauge surface and plane disagree");
  OracleValue out;
  if (k == 0) {
    out.value = 1.0;
    return out;
  }
  const RMat prec = precision.size() == 0 ? RMat(RMat::Identity(k, k)) : precision;
  if (prec.rows() != k || prec.cols() != k) fail_validation("dimension_mismatch", "precision must be k x k");
  const RMat w = omega_gram(L.basis(), G.basis);
  if (std::abs(w.determinant()) < 1e-12) fail_validation("degenerate_pair", "omega is degenerate on L + G");
  const RMat prec_inv = prec.inverse();
  // F(x) = int dy rho(y) exp(i x^T W y) decays like exp(-1/2 x^T W P^{-1} W^T x).
  const ShiftLattice lat = whitened_lattice(w * prec_inv * w.transpose(), RVec::Zero(k));
  double extent = grid.shift_extent;
  cplx prev = 0.0;
  for (int level = 0; level <= grid.max_doublings; ++level) {
    const NodeSet nodes = gaussian_nodes(prec.cast<cplx>(), grid.nodes << level);
    auto F = [&](const RVec& x) {
      const RVec wx = w.transpose() * x;
      const CVec saddle = I_unit * (prec_inv * wx).cast<cplx>();
      std::vector<cplx> terms(nodes.size());
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const CVec y = saddle + Eigen::Map<const CVec>(nodes.offset(i), k);
        const cplx e = -0.5 * (y.transpose() * prec.cast<cplx>() * y)(0) + I_unit * (wx.cast<cplx>().transpose() * y)(0);
        terms[i] = nodes.weights[i] * std::exp(e);
      }
      return pairwise_sum(terms.data(), terms.size());
    };
    const double h = 1.0 / (grid.shift_density * std::pow(2.0, level));
    LatticeSum s;
    for (int widen = 0;; ++widen) {
      s = lattice_sum(lat, k, extent, h, F, grid.mode);
      if (s.boundary_ok) break;
      if (widen == 4) fail_numerical("not_converged", "pairing integrand does not decay on the lattice");
      extent *= 1.5;
    }
    const cplx v = s.value * L.measure_scale() * G.measure_scale;
    if (settled(v, prev, level, std::abs(v), grid, out)) {
      out.extent = extent;
      return out;
    }
    prev = v;
  }
  fail_numerical("not_converged", "pairing quadrature did not converge within the doubling budget");
}

cplx BasisState::evaluate(const RVec& xi) const {
  if (xi.size() != n) fail_validation("dimension_mismatch", "point must have length n");
  const CVec z = xi.cast<cplx>();
  return basis_value(*this, z.data(), false);
}

BasisState project_to_basis(const QuasiGaussianState& psi, int n_max, const RVec& omega, int nodes) {
  const int n = psi.n();
  if (n > 2) fail_validation("cost_guard", "basis states support n <= 2");
  if (n_max < 8 || n_max > kMaxBasisLevel) fail_validation("bad_truncation", "the cutoff must lie in [8, 256]");
  BasisState out;
  out.n = n;
  out.n_max = n_max;
  out.omega = default_omega(omega, n);
  const int m = nodes > 0 ? nodes : n_max + 40;
  // Contour through the saddle of exp(-omega xi^2 / 2) psi(xi).
  const CMat kmat = CMat(out.omega.cast<cplx>().asDiagonal()) - I_unit * psi.gaussian.A;
  const CVec saddle = kmat.inverse() * (I_unit * psi.gaussian.b);
  // No rotation here: high Hermite functions grow quickly off the real axis.
  const NodeSet ns = gaussian_nodes(CMat(kmat.real().cast<cplx>()), m);
  const FastState fs = FastState::of(psi);
  const int d = n_max + 1;
  const Eigen::Index count = static_cast<Eigen::Index>(ns.size());
  CVec fw(count);
  std::vector<CMat> phi(n, CMat(count, d));
  std::vector<cplx> tab(d);
  for (Eigen::Index i = 0; i < count; ++i) {
    const CVec z = saddle + Eigen::Map<const CVec>(ns.offset(static_cast<std::size_t>(i)), n);
    fw(i) = ns.weights[static_cast<std::size_t>(i)] * fs(z.data());
    for (int j = 0; j < n; ++j) {
      hermite_functions<cplx>(z(j), n_max, out.omega(j), tab.data());
      for (int a = 0; a < d; ++a) phi[j](i, a) = tab[a];
    }
  }
  if (n == 1) {
    out.coeffs = phi[0].transpose() * fw;
  } else {
    const CMat c = phi[0].transpose() * fw.asDiagonal() * phi[1];
    out.coeffs = Eigen::Map<const CVec>(c.data(), c.size());
  }
  return out;
}

BasisState pad_basis(const BasisState& s, int n_max) {
  if (n_max < s.n_max) fail_validation("bad_truncation", "padding cannot lower the cutoff");
  BasisState out = s;
  out.n_max = n_max;
  out.coeffs = level_embedding(s.n, s.n_max, n_max) * s.coeffs;
  return out;
}

BasisEvolution numeric_evolve(const QuasiGaussianState& psi, const QuadraticHamiltonian& H,
                              const ConstraintPlane& L, double t, const TruncationSpec& trunc) {
  const int n = L.n();
  if (psi.n() != n || H.n() != n) fail_validation("dimension_mismatch", "state, Hamiltonian and plane disagree");
  if (n > 2) fail_validation("cost_guard", "basis evolution is limited to n <= 2");
  if (trunc.n_max < 8) fail_validation("bad_truncation", "the cutoff must be at least 8");
  if (trunc.max_doublings < 1 || trunc.max_doublings > 4)
    fail_validation("bad_truncation", "between 1 and 4 doublings are allowed");
  if ((trunc.n_max << trunc.max_doublings) > kMaxBasisLevel)
    fail_validation("bad_truncation", "the doubled cutoff would exceed 256");
  const RVec omega = default_omega(trunc.omega, n);
  RMat gamma;
  cplx eps;
  if (trunc.reduce) {
    const Reduction red = reduce_hamiltonian(H, L);
    gamma = red.gamma_prime;
    eps = red.epsilon_prime;
  } else {
    if (!check_compatibility(H, L)) fail_validation("incompatible", "Hamiltonian does not preserve the constraints");
    gamma = H.gamma;
    eps = H.epsilon;
  }
  const cplx phase = std::exp(-I_unit * eps * t);
  BasisEvolution prev;
  for (int level = 0; level <= trunc.max_doublings; ++level) {
    const int nmax = trunc.n_max << level;
    BasisEvolution cur;
    cur.state = project_to_basis(psi, nmax, omega);
    cur.n_max = nmax;
    const SpMat h = quadratic_operator(gamma, n, nmax, omega);
    cur.state.coeffs = phase * taylor_propagate(h, cur.state.coeffs, t, cur.steps);
    if (level > 0) {
      const CVec lower = pad_basis(prev.state, nmax).coeffs;
      cur.error = (cur.state.coeffs - lower).norm() / cur.state.coeffs.norm();
      if (cur.error <= trunc.rel_target) return cur;
    }
    prev = cur;
  }
  fail_numerical("truncation_not_converged", "basis evolution did not converge under cutoff doubling");
}

}  // namespace maslov
