#pragma once

#include <cmath>
#include <cstdint>

#include "si/types.hpp"

namespace si {

/// Normalizing constant of the weight rho_alpha(t) = c(p,alpha)^{-1}|t|^{-alpha-p}:
/// c(p,alpha) = 2 pi^{p/2} Gamma(1-alpha/2) / (alpha 2^alpha Gamma((alpha+p)/2)).
/// At alpha = 1 this is pi^{(1+p)/2}/Gamma((1+p)/2), half the unit-sphere area.
struct WeightConstant {
  int p = 1;
  double alpha = 1.0;
  double value = 0;
};

WeightConstant c_const(int p, double alpha);

/// |v|^alpha for a finite vector expression; 0 iff v = 0.
template <typename Derived>
double norm_alpha(const Eigen::MatrixBase<Derived>& v, double alpha) {
  const double r = v.norm();
  if (r == 0.0) return 0.0;
  return alpha == 1.0 ? r : std::pow(r, alpha);
}

/// The six moment terms on a sample. U-complete enumerates every distinct
/// tuple; u_incomplete averages tuple_budget seeded draws per term (one
/// substream per (seed, term id), chunked so results are identical at any
/// worker count); v_fast delegates to the 1-D with-repetition path.
TermStatistics term_statistics(const PairedSample& sample, const AlphaParam& alpha,
                               const EstimatorConfig& config);

/// All six V-convention terms (indices with repetition) for p = 1, alpha = 1
/// in O(n^2 log n) time via sorted pairwise-difference multisets.
TermStatistics term_statistics_v_fast_1d(const PairedSample& sample);

/// Symmetric kernel of the unbiased estimator on four paired rows:
///   (1/12) sum_{i,j,k distinct} |x_i+y_i-x_j-y_k|^a
/// - (1/24) sum_{i,j,k,l distinct} |x_i+y_j-x_k-y_l|^a
/// - (1/12) sum_{i != j} |x_i+y_i-x_j-y_j|^a
/// Its expectation over four independent copies is 2J1 - J2 - J3.
double kernel_k(const PairedSample& quad, double alpha);
double kernel_k(const PairedSample& sample, Index a, Index b, Index c, Index d,
                double alpha);

struct K1Stats {
  double mean = 0;
  double within_variance = 0;  // sample variance of the kernel draws
  std::uint64_t used = 0;
};

/// First projection of the kernel at row i: the average of kernel_k over
/// triples (j,k,l) of other rows. Enumerates all C(n-1,3) triples when the
/// budget covers them, otherwise draws `budget` seeded distinct triples.
double k1_hat(const PairedSample& sample, Index i, double alpha,
              std::uint64_t budget, std::uint64_t seed);
K1Stats k1_hat_stats(const PairedSample& sample, Index i, double alpha,
                     std::uint64_t budget, std::uint64_t seed);

}  // namespace si
