#include "maslov/polynomial.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace maslov {

namespace {

int total(const Polynomial::Index& a) { return std::accumulate(a.begin(), a.end(), 0); }

}  // namespace

void Polynomial::check_degree(const Index& alpha) const {
  if (static_cast<int>(alpha.size()) != nvars_)
    fail_validation("poly_arity", "multi-index length does not match variable count");
  for (int e : alpha)
    if (e < 0) fail_validation("poly_index", "negative exponent");
  if (total(alpha) > kMaxPolyDegree)
    fail_validation("degree_cap", "polynomial degree exceeds " + std::to_string(kMaxPolyDegree));
}

Polynomial Polynomial::constant(int nvars, cplx c) {
  Polynomial p(nvars);
  p.add_term(Index(nvars, 0), c);
  return p;
}

Polynomial Polynomial::linear(const CVec& a, cplx c0) {
  const int n = static_cast<int>(a.size());
  Polynomial p(n);
  p.add_term(Index(n, 0), c0);
  for (int j = 0; j < n; ++j) {
    Index e(n, 0);
    e[j] = 1;
    p.add_term(e, a(j));
  }
  return p;
}

Polynomial Polynomial::monomial(const Index& alpha, cplx c) {
  Polynomial p(static_cast<int>(alpha.size()));
  p.add_term(alpha, c);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [a, c] : terms_) d = std::max(d, total(a));
  return d;
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [a, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

void Polynomial::add_term(const Index& alpha, cplx c) {
  check_degree(alpha);
  if (c == cplx(0.0)) return;
  auto it = terms_.find(alpha);
  if (it == terms_.end()) {
    terms_.emplace(alpha, c);
  } else {
    it->second += c;
    if (it->second == cplx(0.0)) terms_.erase(it);
  }
}

cplx Polynomial::coeff(const Index& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? cplx(0.0) : it->second;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.nvars_ != nvars_) fail_validation("poly_arity", "variable count mismatch");
  for (const auto& [a, c] : o.terms_) add_term(a, c);
  return *this;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  r += o;
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * cplx(-1.0); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (o.nvars_ != nvars_) fail_validation("poly_arity", "variable count mismatch");
  Polynomial r(nvars_);
  Index e(nvars_);
  for (const auto& [a, ca] : terms_) {
    for (const auto& [b, cb] : o.terms_) {
      for (int j = 0; j < nvars_; ++j) e[j] = a[j] + b[j];
      r.add_term(e, ca * cb);
    }
  }
  return r;
}

Polynomial Polynomial::operator*(cplx s) const {
  Polynomial r(nvars_);
  if (s == cplx(0.0)) return r;
  for (const auto& [a, c] : terms_) r.terms_.emplace(a, c * s);
  return r;
}

Polynomial Polynomial::derivative(int j) const {
  if (j < 0 || j >= nvars_) fail_validation("poly_arity", "derivative variable out of range");
  Polynomial r(nvars_);
  for (const auto& [a, c] : terms_) {
    if (a[j] == 0) continue;
    Index e = a;
    e[j] -= 1;
    r.add_term(e, c * static_cast<double>(a[j]));
  }
  return r;
}

Polynomial Polynomial::conj() const {
  Polynomial r(nvars_);
  for (const auto& [a, c] : terms_) r.terms_.emplace(a, std::conj(c));
  return r;
}

Polynomial Polynomial::pow(int e) const {
  if (e < 0) fail_validation("poly_index", "negative power");
  Polynomial r = constant(nvars_, 1.0);
  Polynomial base = *this;
  while (e > 0) {
    if (e & 1) r = r * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return r;
}

Polynomial Polynomial::substitute(const CMat& m, const CVec& s) const {
  if (m.rows() != nvars_ || s.size() != nvars_)
    fail_validation("poly_arity", "substitution shape mismatch");
  const int nn = static_cast<int>(m.cols());
  // Powers of each substituted linear form, built lazily.
  std::vector<std::vector<Polynomial>> powers(nvars_);
  for (int j = 0; j < nvars_; ++j) {
    powers[j].push_back(constant(nn, 1.0));
    powers[j].push_back(linear(CVec(m.row(j).transpose()), s(j)));
  }
  auto power = [&](int j, int e) -> const Polynomial& {
    while (static_cast<int>(powers[j].size()) <= e) powers[j].push_back(powers[j].back() * powers[j][1]);
    return powers[j][e];
  };
  Polynomial r(nn);
  for (const auto& [a, c] : terms_) {
    Polynomial t = constant(nn, c);
    for (int j = 0; j < nvars_; ++j)
      if (a[j] > 0) t = t * power(j, a[j]);
    r += t;
  }
  return r;
}

cplx Polynomial::evaluate(const CVec& x) const {
  if (x.size() != nvars_) fail_validation("poly_arity", "evaluation point has wrong length");
  cplx sum = 0.0;
  for (const auto& [a, c] : terms_) {
    cplx t = c;
    for (int j = 0; j < nvars_; ++j)
      for (int e = 0; e < a[j]; ++e) t *= x(j);
    sum += t;
  }
  return sum;
}

Polynomial Polynomial::pruned(double rel_tol) const {
  const double cut = rel_tol * max_abs_coeff();
  Polynomial r(nvars_);
  for (const auto& [a, c] : terms_)
    if (std::abs(c) > cut) r.terms_.emplace(a, c);
  return r;
}

}  // namespace maslov
