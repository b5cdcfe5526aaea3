#pragma once

#include <utility>

#include "si/kernels.hpp"
#include "si/types.hpp"

namespace si {

/// Point estimate of the sub-independence covariance, 2*J1 - J2 - J3.
/// U modes need n >= 4; negative values are legitimate U-statistic outcomes
/// and are reported with a warning, never clamped.
EstimatorReport sicov_hat(const PairedSample& sample, const AlphaParam& alpha,
                          const EstimatorConfig& config);

/// With-repetition V-statistic for p = 1, alpha = 1 in O(n^2 log n).
/// Agrees with naive all-tuples V enumeration to 1e-10.
EstimatorReport sicov_v_fast_1d(const PairedSample& sample, const AlphaParam& alpha);

/// Normalized estimate (2*J1 - J2 - J3) / (K1 + K2 - K3). Numerator and
/// denominator share one set of term draws. Returns 0 with a warning when a
/// margin is empirically constant; throws NumericError when the denominator
/// is nonpositive on non-constant data.
EstimatorReport sicor_hat(const PairedSample& sample, const AlphaParam& alpha,
                          const EstimatorConfig& config);

/// Distance covariance/correlation at alpha = 1 (double-centered pairwise
/// distances, O(n^2) time, O(n) memory). Baseline for comparisons only.
std::pair<DependenceEstimate, DependenceEstimate> dcov_dcor_baseline(
    const PairedSample& sample, double alpha = 1.0);

/// Product-moment correlation, p = 1 only.
DependenceEstimate pearson_baseline(const PairedSample& sample);

}  // namespace si
