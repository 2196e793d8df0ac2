#pragma once

#include "maslov/polynomial.hpp"
#include "maslov/types.hpp"

namespace maslov {

/// E[poly(z)] for z with mean m and covariance cov, by the Gaussian moment
/// recursion.  Entries may be complex.
cplx gaussian_expectation(const CVec& mean, const CMat& cov, const Polynomial& poly);

/// int_{R^N} exp(-1/2 z^T K z + v^T z) poly(z) dz times exp(log_amp).
/// K must be complex symmetric, nonsingular, with Re K positive
/// semidefinite; the result is then the limit of absolutely convergent
/// integrals and det(K)^{-1/2} takes the principal branch per eigenvalue.
cplx gaussian_integral(const CMat& K, const CVec& v, const Polynomial& poly, cplx log_amp = 0.0);

}  // namespace maslov
