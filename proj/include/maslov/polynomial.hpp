#pragma once

#include <map>
#include <vector>

#include "maslov/types.hpp"

namespace maslov {

inline constexpr int kMaxPolyDegree = 32;

/// Sparse polynomial in a fixed number of variables with complex
/// coefficients, keyed by exponent multi-index.
class Polynomial {
 public:
  using Index = std::vector<int>;
  using Terms = std::map<Index, cplx>;

  explicit Polynomial(int nvars = 0) : nvars_(nvars) {}

  static Polynomial constant(int nvars, cplx c);
  /// c0 + sum_j a_j z_j
  static Polynomial linear(const CVec& a, cplx c0 = 0.0);
  static Polynomial monomial(const Index& alpha, cplx c = 1.0);

  int nvars() const { return nvars_; }
  int degree() const;
  const Terms& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  double max_abs_coeff() const;

  void add_term(const Index& alpha, cplx c);
  cplx coeff(const Index& alpha) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(cplx s) const;
  Polynomial& operator+=(const Polynomial& o);

  Polynomial derivative(int j) const;
  /// Coefficient-wise conjugate, i.e. conj(P(x)) for real x.
  Polynomial conj() const;
  /// Q(z) = P(m z + s) with m of shape nvars x N.
  Polynomial substitute(const CMat& m, const CVec& s) const;
  Polynomial pow(int e) const;

  cplx evaluate(const CVec& x) const;
  cplx evaluate(const RVec& x) const { return evaluate(CVec(x.cast<cplx>())); }

  /// Drops terms with |coeff| <= tol * max |coeff|.
  Polynomial pruned(double rel_tol = 0.0) const;

 private:
  void check_degree(const Index& alpha) const;

  int nvars_;
  Terms terms_;
};

inline Polynomial operator*(cplx s, const Polynomial& p) { return p * s; }

}  // namespace maslov
