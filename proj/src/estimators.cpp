#include "si/estimators.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace si {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

EstimatorReport sicov_hat(const PairedSample& sample, const AlphaParam& alpha,
                          const EstimatorConfig& config) {
  const auto t0 = Clock::now();
  const EstimatorMode mode = resolve_mode(config, sample.n());

  EstimatorReport report;
  report.terms = term_statistics(sample, alpha, config);
  report.estimate.value = report.terms.numerator();
  report.estimate.kind = EstimateKind::sicov;
  report.estimate.alpha = alpha.value();
  report.estimate.mode = mode;
  report.estimate.n = sample.n();
  if (report.estimate.value < 0) {
    report.estimate.warnings.push_back(
        "sicov estimate " + fmt(report.estimate.value) +
        " is negative: a legitimate U-statistic outcome near sub-independence");
  }
  report.elapsed = Clock::now() - t0;
  return report;
}

EstimatorReport sicov_v_fast_1d(const PairedSample& sample, const AlphaParam& alpha) {
  EstimatorConfig config;
  config.mode = EstimatorMode::v_fast;
  return sicov_hat(sample, alpha, config);
}

EstimatorReport sicor_hat(const PairedSample& sample, const AlphaParam& alpha,
                          const EstimatorConfig& config) {
  const auto t0 = Clock::now();
  const EstimatorMode mode = resolve_mode(config, sample.n());

  EstimatorReport report;
  // Numerator and denominator share one set of term draws so the ratio is
  // smoother than with independent resampling.
  report.terms = term_statistics(sample, alpha, config);
  report.denominator = report.terms.denominator();
  report.estimate.kind = EstimateKind::sicor;
  report.estimate.alpha = alpha.value();
  report.estimate.mode = mode;
  report.estimate.n = sample.n();

  if (sample.x_constant() || sample.y_constant()) {
    // The definition's zero branch: the normalizing integral vanishes.
    report.estimate.value = 0.0;
    report.estimate.warnings.push_back(
        "a margin is empirically constant; sicor is 0 by definition");
    report.elapsed = Clock::now() - t0;
    return report;
  }

  const double den = *report.denominator;
  if (!(den > 0)) {
    throw NumericError("sicor denominator K1 + K2 - K3 = " + fmt(den) +
                       " is not positive: sample too small or degenerate");
  }
  double value = report.terms.numerator() / den;
  if (value < 0.0 || value > 1.0) {
    report.estimate.warnings.push_back("sicor estimate " + fmt(value) +
                                       " lies outside [0,1] (finite-sample fluctuation)");
    if (config.clamp_sicor) {
      value = std::min(1.0, std::max(0.0, value));
      report.estimate.warnings.push_back("sicor clamped to [0,1]");
    }
  }
  report.estimate.value = value;
  report.elapsed = Clock::now() - t0;
  return report;
}

namespace {

double row_distance(const PairedSample& sample, bool use_x, Index i, Index j) {
  const Matrix& m = use_x ? sample.x() : sample.y();
  if (m.cols() == 1) return std::abs(m(i, 0) - m(j, 0));
  return (m.row(i) - m.row(j)).norm();
}

}  // namespace

std::pair<DependenceEstimate, DependenceEstimate> dcov_dcor_baseline(
    const PairedSample& sample, double alpha) {
  if (alpha != 1.0) {
    throw ValidationError("dcov baseline supports alpha = 1 only");
  }
  const Index n = sample.n();
  if (n < 2) throw ValidationError("dcov baseline needs n >= 2");

  // V^2 = S1 + S2 - 2 S3 with S1 = mean a_ij b_ij, S2 = mean(a) mean(b),
  // S3 = mean_i of row-mean products; accumulated in two O(n^2) passes so no
  // distance matrix is materialized.
  Vector arow = Vector::Zero(n), brow = Vector::Zero(n);
  double ab = 0, aa = 0, bb = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double a = row_distance(sample, true, i, j);
      const double b = row_distance(sample, false, i, j);
      arow[i] += a;
      arow[j] += a;
      brow[i] += b;
      brow[j] += b;
      ab += 2 * a * b;
      aa += 2 * a * a;
      bb += 2 * b * b;
    }
  }
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  const double a_mean = arow.sum() / nn;
  const double b_mean = brow.sum() / nn;
  const double s3ab = arow.dot(brow) / (nn * static_cast<double>(n));
  const double s3aa = arow.dot(arow) / (nn * static_cast<double>(n));
  const double s3bb = brow.dot(brow) / (nn * static_cast<double>(n));

  const double v2xy = ab / nn + a_mean * b_mean - 2 * s3ab;
  const double v2xx = aa / nn + a_mean * a_mean - 2 * s3aa;
  const double v2yy = bb / nn + b_mean * b_mean - 2 * s3bb;

  DependenceEstimate dcov;
  dcov.kind = EstimateKind::dcov;
  dcov.alpha = alpha;
  dcov.n = n;
  dcov.value = std::sqrt(std::max(0.0, v2xy));

  DependenceEstimate dcor;
  dcor.kind = EstimateKind::dcor;
  dcor.alpha = alpha;
  dcor.n = n;
  const double prod = v2xx * v2yy;
  if (prod > 0) {
    dcor.value = std::sqrt(std::max(0.0, v2xy / std::sqrt(prod)));
  } else {
    dcor.value = 0.0;
    dcor.warnings.push_back("a margin has zero distance variance; dcor is 0 by definition");
  }
  return {dcov, dcor};
}

DependenceEstimate pearson_baseline(const PairedSample& sample) {
  if (sample.p() != 1) throw ValidationError("pearson baseline requires p = 1");
  const Index n = sample.n();
  if (n < 2) throw ValidationError("pearson baseline needs n >= 2");

  const double mx = sample.x().col(0).mean();
  const double my = sample.y().col(0).mean();
  double sxy = 0, sxx = 0, syy = 0;
  for (Index i = 0; i < n; ++i) {
    const double dx = sample.x()(i, 0) - mx;
    const double dy = sample.y()(i, 0) - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) {
    throw NumericError("pearson baseline undefined: a margin has zero variance");
  }
  DependenceEstimate est;
  est.kind = EstimateKind::pearson;
  est.alpha = 1.0;
  est.n = n;
  est.value = sxy / std::sqrt(sxx * syy);
  return est;
}

}  // namespace si
