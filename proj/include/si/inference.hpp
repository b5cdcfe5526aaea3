#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "si/types.hpp"

namespace si {

struct TestResult {
  double statistic = 0;  // n * sicov_hat on the original pairing
  std::vector<double> replicates;
  double p_value = 1;    // (1 + #{replicate >= statistic}) / (permutations + 1)
  double level = 0.05;
  bool reject = false;
  int permutations = 0;
  std::uint64_t seed = 0;
};

/// Permutation test of sub-independence via the independence null: y rows are
/// re-paired by seeded uniform permutations. Exact for independent margins;
/// behavior under "sub-independent but dependent" nulls is not calibrated.
/// Requires permutations >= 19 and n >= 4.
TestResult permutation_test(const PairedSample& sample, const AlphaParam& alpha,
                            int permutations, double level,
                            const EstimatorConfig& config);

struct ConfidenceInterval {
  double lower = 0;
  double upper = 0;
  double level = 0;
  double variance_hat = 0;  // estimated variance of the point estimate
  double center = 0;
  std::vector<std::string> warnings;
};

/// Normal-quantile interval from the 16*Var(k1)/n asymptotic variance.
/// Var(k1) is the across-row sample variance of {k1_hat(i)} minus the
/// mean within-row Monte Carlo variance over the k1 budget. A degeneracy
/// warning is attached when variance_hat < 1e-3 (K1+K2)^2 / n, the regime
/// where the normal limit fails. Requires n >= 8.
ConfidenceInterval asymptotic_ci(const PairedSample& sample, const AlphaParam& alpha,
                                 double level, std::uint64_t k1_budget,
                                 const EstimatorConfig& config);

/// Deterministic dataset source: replicate r of size n under (seed, r).
struct SampleGenerator {
  std::string name;
  std::function<PairedSample(Index n, std::uint64_t seed, std::uint64_t replicate)> draw;
};

/// sqrt(n) * sicov_hat over seeded replicates of the generator; used to
/// picture the non-normal null limit. Requires replicates >= 100.
std::vector<double> null_distribution_sim(const SampleGenerator& generator, Index n,
                                          int replicates, const AlphaParam& alpha,
                                          std::uint64_t seed,
                                          const EstimatorConfig& config = {});

// Moment summaries for the null-shape checks.
double sample_skewness(std::span<const double> values);
double sample_excess_kurtosis(std::span<const double> values);
/// Jarque-Bera statistic; under normality asymptotically chi^2(2), so the
/// p-value is exp(-jb/2).
double jarque_bera(std::span<const double> values);

/// Inverse standard normal CDF (Acklam's rational approximation plus one
/// Halley refinement; accurate to ~1e-15).
double normal_quantile(double prob);

}  // namespace si
