#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "maslov/types.hpp"

namespace maslov {

/// Nodes and weights for the weight exp(-y^2) on the real line.
struct GaussHermiteRule {
  RVec nodes;
  RVec weights;
  RVec scaled_weights;  // weights * exp(nodes^2), for integrands without the weight
};

GaussHermiteRule gauss_hermite(int m);

/// Tensor-product node y and weight for index i of an m^d grid; `scaled`
/// picks the weights that already carry exp(|y|^2).
void tensor_node(const GaussHermiteRule& rule, int dim, std::size_t index, RVec& y, double& weight,
                 bool scaled = false);

enum class SumMode { Serial, Parallel };

/// Pairwise summation; blocks of 16 are summed left to right.
cplx pairwise_sum(const cplx* v, std::size_t n);

/// Number of contiguous chunks used by the parallel sum.  Fixed, so results
/// do not depend on the thread count.
constexpr int kSumPartitions = 16;

/// values[i] = f(i), in parallel when mode is Parallel.
void evaluate_terms(std::size_t n, const std::function<cplx(std::size_t)>& f, std::vector<cplx>& values,
                    SumMode mode);

/// Serial: one pairwise sum.  Parallel: pairwise sums over kSumPartitions
/// contiguous chunks, then a pairwise sum of the chunk sums.
cplx sum_values(const std::vector<cplx>& values, SumMode mode);

/// sum_{i < n} f(i).  Serial: one pairwise sum over all terms.  Parallel:
/// f is evaluated with OpenMP, each chunk is summed pairwise and the chunk
/// sums are summed pairwise.  f must be safe to call concurrently.
cplx sum_terms(std::size_t n, const std::function<cplx(std::size_t)>& f, SumMode mode);

}  // namespace maslov
