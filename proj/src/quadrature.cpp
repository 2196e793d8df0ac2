#include "maslov/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace maslov {

GaussHermiteRule gauss_hermite(int m) {
  if (m < 1) fail_validation("bad_rule", "quadrature needs at least one node");
  // Golub-Welsch: eigenvalues of the Jacobi matrix of the Hermite recurrence.
  RMat jac = RMat::Zero(m, m);
  for (int i = 1; i < m; ++i) jac(i, i - 1) = jac(i - 1, i) = std::sqrt(0.5 * i);
  const Eigen::SelfAdjointEigenSolver<RMat> es(jac);
  GaussHermiteRule rule;
  rule.nodes = es.eigenvalues();
  // Christoffel numbers from the orthonormal Hermite functions keep the
  // outer weights accurate in relative terms.
  rule.weights.resize(m);
  rule.scaled_weights.resize(m);
  for (int i = 0; i < m; ++i) {
    const double x = rule.nodes(i);
    double prev = 0.0;
    double cur = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
    double sum = cur * cur;
    for (int j = 0; j + 1 < m; ++j) {
      const double next = std::sqrt(2.0 / (j + 1)) * x * cur - std::sqrt(static_cast<double>(j) / (j + 1)) * prev;
      prev = cur;
      cur = next;
      sum += cur * cur;
    }
    rule.scaled_weights(i) = 1.0 / sum;
    rule.weights(i) = std::exp(-x * x) / sum;
  }
  return rule;
}

void tensor_node(const GaussHermiteRule& rule, int dim, std::size_t index, RVec& y, double& weight,
                 bool scaled) {
  const RVec& w = scaled ? rule.scaled_weights : rule.weights;
  const std::size_t m = static_cast<std::size_t>(rule.nodes.size());
  y.resize(dim);
  weight = 1.0;
  for (int d = 0; d < dim; ++d) {
    const std::size_t j = index % m;
    index /= m;
    y(d) = rule.nodes(static_cast<Eigen::Index>(j));
    weight *= w(static_cast<Eigen::Index>(j));
  }
}

cplx pairwise_sum(const cplx* v, std::size_t n) {
  if (n <= 16) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

void evaluate_terms(std::size_t n, const std::function<cplx(std::size_t)>& f, std::vector<cplx>& values,
                    SumMode mode) {
  values.resize(n);
  if (mode == SumMode::Serial) {
    for (std::size_t i = 0; i < n; ++i) values[i] = f(i);
    return;
  }
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) values[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
}

cplx sum_values(const std::vector<cplx>& values, SumMode mode) {
  const std::size_t n = values.size();
  if (mode == SumMode::Serial) return pairwise_sum(values.data(), n);
  std::vector<cplx> partial(kSumPartitions, 0.0);
  const std::size_t chunk = (n + kSumPartitions - 1) / kSumPartitions;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < kSumPartitions; ++p) {
    const std::size_t lo = std::min(n, static_cast<std::size_t>(p) * chunk);
    const std::size_t hi = std::min(n, lo + chunk);
    partial[p] = pairwise_sum(values.data() + lo, hi - lo);
  }
  return pairwise_sum(partial.data(), partial.size());
}

cplx sum_terms(std::size_t n, const std::function<cplx(std::size_t)>& f, SumMode mode) {
  std::vector<cplx> values;
  evaluate_terms(n, f, values, mode);
  return sum_values(values, mode);
}

}  // namespace maslov
