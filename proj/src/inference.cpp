#include "si/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "parallel_util.hpp"
#include "si/estimators.hpp"
#include "si/rng.hpp"

namespace si {

namespace {

// Precomputed state for the 1-D alpha=1 V-statistic under y-permutations.
// The multisets {x_i - x_k}, {y_j - y_l} and {x_j + y_k} do not depend on the
// pairing, so J2 and the pair-sum pool are built once; each permutation only
// re-evaluates J1 (queries of s_i = x_i + y_{pi(i)} against the pool) and J3.
class VFastPermutationEngine {
 public:
  VFastPermutationEngine(const PairedSample& sample)
      : n_(sample.n()), x_(sample.x().data(), sample.x().data() + n_),
        y_(sample.y().data(), sample.y().data() + n_) {
    const std::size_t nn = static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
    d_.reserve(nn);
    for (Index j = 0; j < n_; ++j) {
      for (Index k = 0; k < n_; ++k) d_.push_back(x_[j] + y_[k]);
    }
    std::sort(d_.begin(), d_.end());
    d_prefix_.resize(nn + 1, 0.0);
    for (std::size_t m = 0; m < nn; ++m) d_prefix_[m + 1] = d_prefix_[m] + d_[m];

    std::vector<double> a, b;
    a.reserve(nn);
    b.reserve(nn);
    for (Index j = 0; j < n_; ++j) {
      for (Index k = 0; k < n_; ++k) {
        a.push_back(-(x_[j] - x_[k]));
        b.push_back(y_[j] - y_[k]);
      }
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double cross = 0, below = 0;
    std::size_t pos = 0;
    const double total = std::accumulate(b.begin(), b.end(), 0.0);
    for (const double q : a) {
      while (pos < nn && b[pos] <= q) below += b[pos++];
      cross += q * static_cast<double>(pos) - below + (total - below) -
               q * static_cast<double>(nn - pos);
    }
    j2_ = cross / (static_cast<double>(nn) * static_cast<double>(nn));
  }

  // V-convention sicov = 2 J1 - J2 - J3 with y re-paired as y[perm[i]];
  // perm == nullptr means the identity pairing.
  double sicov(const std::uint32_t* perm) const {
    std::vector<double> s(static_cast<std::size_t>(n_));
    for (Index i = 0; i < n_; ++i) {
      s[static_cast<std::size_t>(i)] = x_[i] + y_[perm ? perm[i] : i];
    }
    std::sort(s.begin(), s.end());

    const std::size_t nn = d_.size();
    double j1 = 0;
    for (const double q : s) {
      const auto it = std::upper_bound(d_.begin(), d_.end(), q);
      const auto c = static_cast<std::size_t>(it - d_.begin());
      const double below = d_prefix_[c];
      j1 += q * static_cast<double>(c) - below + (d_prefix_[nn] - below) -
            q * static_cast<double>(nn - c);
    }
    j1 /= static_cast<double>(n_) * static_cast<double>(nn);

    double j3 = 0, prefix = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      j3 += s[i] * static_cast<double>(i) - prefix;
      prefix += s[i];
    }
    j3 *= 2.0 / (static_cast<double>(n_) * static_cast<double>(n_));

    return 2.0 * j1 - j2_ - j3;
  }

 private:
  Index n_;
  std::vector<double> x_, y_;
  std::vector<double> d_, d_prefix_;
  double j2_ = 0;
};

PairedSample permute_y(const PairedSample& sample, const std::vector<std::uint32_t>& perm) {
  Matrix y(sample.n(), sample.p());
  for (Index i = 0; i < sample.n(); ++i) {
    y.row(i) = sample.y().row(static_cast<Index>(perm[static_cast<std::size_t>(i)]));
  }
  return PairedSample(sample.x(), std::move(y));
}

}  // namespace

TestResult permutation_test(const PairedSample& sample, const AlphaParam& alpha,
                            int permutations, double level,
                            const EstimatorConfig& config) {
  if (permutations < 19) {
    throw ValidationError("permutations must be >= 19 to resolve level 0.05, got " +
                          std::to_string(permutations));
  }
  if (!(level > 0 && level < 1)) throw ValidationError("level must lie in (0,1)");
  const Index n = sample.n();
  if (n < 4) throw ValidationError("permutation test needs n >= 4");

  const EstimatorMode mode = resolve_mode(config, n);
  const double scale = static_cast<double>(n);

  TestResult result;
  result.level = level;
  result.permutations = permutations;
  result.seed = config.seed;

  const auto nperm = static_cast<std::size_t>(permutations);
  if (mode == EstimatorMode::v_fast && sample.p() == 1 && alpha.value() == 1.0) {
    const VFastPermutationEngine engine(sample);
    result.statistic = scale * engine.sicov(nullptr);
    result.replicates = detail::ordered_parallel_map(
        nperm, config.threads, [&](std::size_t r) {
          Rng rng(substream_seed(config.seed, stream::permutation, r));
          const auto perm = rng.permutation(static_cast<std::uint32_t>(n));
          return scale * engine.sicov(perm.data());
        });
  } else {
    result.statistic = scale * sicov_hat(sample, alpha, config).estimate.value;
    result.replicates = detail::ordered_parallel_map(
        nperm, config.threads, [&](std::size_t r) {
          Rng rng(substream_seed(config.seed, stream::permutation, r));
          const auto perm = rng.permutation(static_cast<std::uint32_t>(n));
          const PairedSample shuffled = permute_y(sample, perm);
          return scale * sicov_hat(shuffled, alpha, config).estimate.value;
        });
  }

  std::size_t at_least = 0;
  for (const double v : result.replicates) {
    if (v >= result.statistic) ++at_least;
  }
  result.p_value = static_cast<double>(1 + at_least) / static_cast<double>(permutations + 1);
  result.reject = result.p_value <= level;
  return result;
}

ConfidenceInterval asymptotic_ci(const PairedSample& sample, const AlphaParam& alpha,
                                 double level, std::uint64_t k1_budget,
                                 const EstimatorConfig& config) {
  const Index n = sample.n();
  if (n < 8) throw ValidationError("asymptotic_ci needs n >= 8");
  if (!(level > 0 && level < 1)) throw ValidationError("level must lie in (0,1)");
  if (k1_budget < 2) throw ValidationError("k1 budget must be >= 2");

  const EstimatorReport point = sicov_hat(sample, alpha, config);

  const auto stats = detail::ordered_parallel_map(
      static_cast<std::size_t>(n), config.threads, [&](std::size_t i) {
        return k1_hat_stats(sample, static_cast<Index>(i), alpha.value(), k1_budget,
                            config.seed);
      });

  double mean = 0;
  for (const auto& s : stats) mean += s.mean;
  mean /= static_cast<double>(n);
  double between = 0, mc_correction = 0;
  for (const auto& s : stats) {
    between += (s.mean - mean) * (s.mean - mean);
    // An exhaustively enumerated projection has no Monte Carlo noise to remove.
    const bool exhaustive = s.used >= static_cast<std::uint64_t>(n - 1) *
                                          static_cast<std::uint64_t>(n - 2) *
                                          static_cast<std::uint64_t>(n - 3) / 6;
    if (!exhaustive) mc_correction += s.within_variance / static_cast<double>(s.used);
  }
  between /= static_cast<double>(n - 1);
  mc_correction /= static_cast<double>(n);

  const double var_k1 = std::max(0.0, between - mc_correction);

  ConfidenceInterval ci;
  ci.level = level;
  ci.center = point.estimate.value;
  ci.variance_hat = 16.0 * var_k1 / static_cast<double>(n);
  const double z = normal_quantile(0.5 + 0.5 * level);
  const double half = z * std::sqrt(ci.variance_hat);
  ci.lower = ci.center - half;
  ci.upper = ci.center + half;

  const double k_scale = point.terms.k1 + point.terms.k2;
  if (k_scale == 0.0) {
    ci.warnings.push_back("sample is constant; interval collapses to a point");
  } else if (ci.variance_hat < 1e-3 * k_scale * k_scale / static_cast<double>(n)) {
    ci.warnings.push_back(
        "degenerate regime: Var(k1) is consistent with sub-independence, where the "
        "normal limit fails; interpret the interval with caution");
  }
  return ci;
}

std::vector<double> null_distribution_sim(const SampleGenerator& generator, Index n,
                                          int replicates, const AlphaParam& alpha,
                                          std::uint64_t seed,
                                          const EstimatorConfig& config) {
  if (replicates < 100) throw ValidationError("null simulation needs replicates >= 100");
  const double scale = std::sqrt(static_cast<double>(n));
  return detail::ordered_parallel_map(
      static_cast<std::size_t>(replicates), config.threads, [&](std::size_t r) {
        const PairedSample draw = generator.draw(n, seed, r);
        return scale * sicov_hat(draw, alpha, config).estimate.value;
      });
}

// --- moment summaries --------------------------------------------------------

namespace {

struct Moments {
  double mean = 0, m2 = 0, m3 = 0, m4 = 0;
};

Moments central_moments(std::span<const double> values) {
  Moments m;
  const auto n = static_cast<double>(values.size());
  for (const double v : values) m.mean += v;
  m.mean /= n;
  for (const double v : values) {
    const double d = v - m.mean;
    m.m2 += d * d;
    m.m3 += d * d * d;
    m.m4 += d * d * d * d;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

}  // namespace

double sample_skewness(std::span<const double> values) {
  if (values.size() < 3) throw ValidationError("skewness needs at least 3 values");
  const Moments m = central_moments(values);
  if (m.m2 == 0) return 0;
  return m.m3 / std::pow(m.m2, 1.5);
}

double sample_excess_kurtosis(std::span<const double> values) {
  if (values.size() < 4) throw ValidationError("kurtosis needs at least 4 values");
  const Moments m = central_moments(values);
  if (m.m2 == 0) return 0;
  return m.m4 / (m.m2 * m.m2) - 3.0;
}

double jarque_bera(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  const double s = sample_skewness(values);
  const double k = sample_excess_kurtosis(values);
  return n * (s * s / 6.0 + k * k / 24.0);
}

double normal_quantile(double prob) {
  if (!(prob > 0 && prob < 1)) throw ValidationError("quantile probability must lie in (0,1)");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;

  double x;
  if (prob < plow) {
    const double q = std::sqrt(-2 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (prob > 1 - plow) {
    const double q = std::sqrt(-2 * std::log(1 - prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  }

  // One Halley step against erfc brings the central region to machine
  // precision. Skipped in the extreme tails where the exp factor amplifies
  // erfc cancellation past the raw approximation's 1.2e-9 accuracy.
  if (std::abs(x) < 5.5) {
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - prob;
    const double u = e * std::sqrt(2 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1 + 0.5 * x * u);
  }
  return x;
}

}  // namespace si
