#include "maslov/gaussian_integral.hpp"

#include <cmath>
#include <map>

#include "maslov/linalg.hpp"

namespace maslov {

namespace {

class MomentTable {
 public:
  MomentTable(const CVec& m, const CMat& s) : m_(m), s_(s) {}

  cplx get(Polynomial::Index a) {
    auto it = memo_.find(a);
    if (it != memo_.end()) return it->second;
    const int n = static_cast<int>(a.size());
    int i = 0;
    while (i < n && a[i] == 0) ++i;
    cplx val = 1.0;
    if (i < n) {
      a[i] -= 1;
      val = m_(i) * get(a);
      for (int j = 0; j < n; ++j) {
        if (a[j] == 0 || s_(i, j) == cplx(0.0)) continue;
        const double mult = a[j];
        a[j] -= 1;
        val += s_(i, j) * mult * get(a);
        a[j] += 1;
      }
      a[i] += 1;
    }
    memo_.emplace(a, val);
    return val;
  }

 private:
  const CVec& m_;
  const CMat& s_;
  std::map<Polynomial::Index, cplx> memo_;
};

}  // namespace

cplx gaussian_expectation(const CVec& mean, const CMat& cov, const Polynomial& poly) {
  if (mean.size() != poly.nvars() || cov.rows() != mean.size() || cov.cols() != mean.size())
    fail_validation("dimension_mismatch", "moment shapes do not match the polynomial");
  MomentTable t(mean, cov);
  cplx sum = 0.0;
  for (const auto& [a, c] : poly.terms()) sum += c * t.get(a);
  return sum;
}

cplx gaussian_integral(const CMat& K, const CVec& v, const Polynomial& poly, cplx log_amp) {
  const Eigen::Index nn = K.rows();
  if (K.cols() != nn || v.size() != nn || poly.nvars() != nn)
    fail_validation("dimension_mismatch", "Gaussian integral shapes do not match");
  if (poly.empty()) return 0.0;
  if (nn == 0) return std::exp(log_amp) * poly.coeff({});
  const CMat ks = linalg::symmetrize(K);
  Eigen::SelfAdjointEigenSolver<RMat> re(RMat(ks.real()));
  const double scale = std::max(1.0, ks.cwiseAbs().maxCoeff());
  if (re.eigenvalues().minCoeff() < -1e-10 * scale)
    fail_numerical("divergent_integral", "real part of the quadratic form is not positive semidefinite");
  Eigen::FullPivLU<CMat> lu(ks);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) fail_numerical("singular_form", "quadratic form is singular");
  const CMat cov = lu.inverse();
  const CVec mean = cov * v;
  const cplx log_det = linalg::sum_log_eigenvalues(ks);
  const cplx exponent = log_amp + 0.5 * static_cast<double>(nn) * std::log(kTwoPi) - 0.5 * log_det +
                        0.5 * (v.transpose() * mean)(0);
  return std::exp(exponent) * gaussian_expectation(mean, linalg::symmetrize(cov), poly);
}

}  // namespace maslov
