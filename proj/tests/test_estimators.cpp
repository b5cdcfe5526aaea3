#include <doctest.h>

#include <cmath>

#include "brute_oracle.hpp"
#include "si/estimators.hpp"
#include "si/rng.hpp"
#include "si/simulate.hpp"

using namespace si;

namespace {

PairedSample random_sample(Index n, Index p, std::uint64_t seed, double couple = 0.5) {
  Rng rng(substream_seed(seed, 0xE57));
  Matrix x(n, p), y(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index q = 0; q < p; ++q) {
      x(i, q) = rng.normal();
      y(i, q) = couple * x(i, q) + rng.normal();
    }
  }
  return PairedSample(std::move(x), std::move(y));
}

double kernel_subset_average(const PairedSample& sm, double alpha) {
  const Index n = sm.n();
  double acc = 0;
  double cnt = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      for (Index k = j + 1; k < n; ++k) {
        for (Index l = k + 1; l < n; ++l) {
          acc += kernel_k(sm, i, j, k, l, alpha);
          cnt += 1;
        }
      }
    }
  }
  return acc / cnt;
}

}  // namespace

TEST_CASE("u-complete sicov equals the kernel subset average") {
  EstimatorConfig config;
  config.mode = EstimatorMode::u_complete;
  for (const Index n : {Index{6}, Index{8}}) {
    const PairedSample sm = random_sample(n, 1, 100 + static_cast<std::uint64_t>(n));
    const double direct = sicov_hat(sm, AlphaParam(1.0), config).estimate.value;
    const double averaged = kernel_subset_average(sm, 1.0);
    CHECK(std::abs(direct - averaged) <= 1e-12);
  }
}

TEST_CASE("sicov is symmetric in its margins") {
  const PairedSample sm = random_sample(10, 2, 3);
  const PairedSample swapped(sm.y(), sm.x());
  EstimatorConfig config;
  config.mode = EstimatorMode::u_complete;
  const double a = sicov_hat(sm, AlphaParam(1.0), config).estimate.value;
  const double b = sicov_hat(swapped, AlphaParam(1.0), config).estimate.value;
  CHECK(std::abs(a - b) <= 1e-12);
}

TEST_CASE("estimator-level affine invariance") {
  const PairedSample sm = random_sample(9, 3, 5);
  const Matrix c = random_orthonormal(3, 11);
  const double b = -0.75;
  Matrix x = b * sm.x() * c.transpose();
  Matrix y = b * sm.y() * c.transpose();
  x.rowwise() += Eigen::RowVector3d(1, -2, 0.5);
  y.rowwise() += Eigen::RowVector3d(-0.25, 4, 1);
  const PairedSample moved(x, y);

  EstimatorConfig config;
  config.mode = EstimatorMode::u_complete;
  const auto base_cov = sicov_hat(sm, AlphaParam(1.0), config).estimate.value;
  const auto moved_cov = sicov_hat(moved, AlphaParam(1.0), config).estimate.value;
  CHECK(moved_cov == doctest::Approx(std::abs(b) * base_cov).epsilon(1e-9));

  const auto base_cor = sicor_hat(sm, AlphaParam(1.0), config).estimate.value;
  const auto moved_cor = sicor_hat(moved, AlphaParam(1.0), config).estimate.value;
  CHECK(moved_cor == doctest::Approx(base_cor).epsilon(1e-9));
}

TEST_CASE("v-fast estimate equals naive V enumeration at n = 30") {
  const PairedSample sm = random_sample(30, 1, 7, 0.4);
  const auto report = sicov_v_fast_1d(sm, AlphaParam(1.0));
  const auto naive = brute::enumerate_terms(sm, 1.0, false);
  CHECK(std::abs(report.estimate.value - naive.sicov()) <= 1e-10);
  CHECK(report.estimate.mode == EstimatorMode::v_fast);
}

TEST_CASE("v-fast on a constant sample is zero") {
  Matrix x(5, 1), y(5, 1);
  x.setConstant(3.25);
  y.setConstant(-0.5);
  const auto report = sicov_v_fast_1d(PairedSample(x, y), AlphaParam(1.0));
  CHECK(report.estimate.value == 0.0);
}

TEST_CASE("v-statistic sicov is nonnegative (plug-in form)") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PairedSample sm = random_sample(12, 1, 200 + seed, 0.0);
    const auto report = sicov_v_fast_1d(sm, AlphaParam(1.0));
    CHECK(report.estimate.value >= -1e-12);
  }
}

TEST_CASE("negative sicov estimates carry a warning") {
  Matrix x(6, 1), y(6, 1);
  x << 3, 1, 4, 1, 5, 9;
  y << 2, 6, 5, 3, 5, 8;
  EstimatorConfig config;
  config.mode = EstimatorMode::u_complete;
  const auto report = sicov_hat(PairedSample(x, y), AlphaParam(1.0), config);
  REQUIRE(report.estimate.value < 0);
  REQUIRE_FALSE(report.estimate.warnings.empty());
  CHECK(report.estimate.warnings[0].find("negative") != std::string::npos);
}

TEST_CASE("sicor on strongly dependent data approaches one") {
  const auto gen = rademacher_pair_sampler();
  const PairedSample sm = draw_sample(gen, 800, 21);
  EstimatorConfig config;
  config.mode = EstimatorMode::v_fast;
  const auto report = sicor_hat(sm, AlphaParam(1.0), config);
  CHECK(report.estimate.value == doctest::Approx(1.0).epsilon(0.06));
  CHECK(*report.denominator > 0);
}

TEST_CASE("sicor zero branch for constant margins") {
  Matrix x(6, 1), y(6, 1);
  x << 1, 2, 3, 4, 5, 6;
  y.setConstant(2.0);
  EstimatorConfig config;
  config.mode = EstimatorMode::u_complete;
  const auto report = sicor_hat(PairedSample(x, y), AlphaParam(1.0), config);
  CHECK(report.estimate.value == 0.0);
  REQUIRE_FALSE(report.estimate.warnings.empty());
  CHECK(report.estimate.warnings[0].find("constant") != std::string::npos);
}

TEST_CASE("sicor rejects a nonpositive denominator on non-constant data") {
  Matrix x(4, 1), y(4, 1);
  x << 1, 0, 0, 0;
  y << 1, 0, 0, 0;  // K1 = K2 = 1/2, K3 = 1: denominator exactly 0
  EstimatorConfig config;
  config.mode = EstimatorMode::u_complete;
  CHECK_THROWS_AS(sicor_hat(PairedSample(x, y), AlphaParam(1.0), config), NumericError);
}

TEST_CASE("out-of-range sicor warns, clamp flag clamps") {
  Matrix x(6, 1), y(6, 1);
  x << 3, 1, 4, 1, 5, 9;
  y << 2, 6, 5, 3, 5, 8;  // numerator is negative here
  EstimatorConfig config;
  config.mode = EstimatorMode::u_complete;
  const auto report = sicor_hat(PairedSample(x, y), AlphaParam(1.0), config);
  REQUIRE(report.estimate.value < 0);
  CHECK_FALSE(report.estimate.warnings.empty());

  config.clamp_sicor = true;
  const auto clamped = sicor_hat(PairedSample(x, y), AlphaParam(1.0), config);
  CHECK(clamped.estimate.value == 0.0);
}

TEST_CASE("sicor reuses one set of term draws for numerator and denominator") {
  const PairedSample sm = random_sample(80, 1, 31);
  EstimatorConfig config;
  config.mode = EstimatorMode::u_incomplete;
  config.tuple_budget = 20000;
  config.seed = 17;
  const auto report = sicor_hat(sm, AlphaParam(1.0), config);
  CHECK(report.estimate.value ==
        doctest::Approx(report.terms.numerator() / report.terms.denominator())
            .epsilon(1e-15));
  // identical seed reproduces the estimate bit for bit
  const auto again = sicor_hat(sm, AlphaParam(1.0), config);
  CHECK(again.estimate.value == report.estimate.value);
}

TEST_CASE("dcor: self-pairing gives one, linear maps give one") {
  Matrix x(12, 1), y(12, 1);
  Rng rng(777);
  for (Index i = 0; i < 12; ++i) {
    x(i, 0) = rng.normal();
    y(i, 0) = x(i, 0);
  }
  const auto [dcov, dcor] = dcov_dcor_baseline(PairedSample(x, y));
  CHECK(dcor.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dcov.value > 0);

  Matrix y2 = 2.0 * x;
  y2.array() += 1.0;
  const auto [dcov2, dcor2] = dcov_dcor_baseline(PairedSample(x, y2));
  CHECK(dcor2.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dcov streaming accumulation equals the double-centered matrix form") {
  const PairedSample sm = random_sample(10, 2, 37);
  const Index n = sm.n();
  Eigen::MatrixXd a(n, n), b(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      a(i, j) = (sm.x().row(i) - sm.x().row(j)).norm();
      b(i, j) = (sm.y().row(i) - sm.y().row(j)).norm();
    }
  }
  const auto center = [n](Eigen::MatrixXd m) {
    const Eigen::VectorXd row_means = m.rowwise().mean();
    const double grand = m.mean();
    m.colwise() -= row_means;
    m.rowwise() -= row_means.transpose();
    m.array() += grand;
    return m;
  };
  const Eigen::MatrixXd ca = center(a), cb = center(b);
  const double v2 = (ca.array() * cb.array()).mean();
  const double vx = (ca.array() * ca.array()).mean();
  const double vy = (cb.array() * cb.array()).mean();
  const double want_dcor = std::sqrt(v2 / std::sqrt(vx * vy));

  const auto [dcov, dcor] = dcov_dcor_baseline(sm);
  CHECK(dcov.value == doctest::Approx(std::sqrt(v2)).epsilon(1e-12));
  CHECK(dcor.value == doctest::Approx(want_dcor).epsilon(1e-12));
}

TEST_CASE("dcor near zero for independent margins") {
  const PairedSample sm = draw_sample(independent_normal_sampler(), 500, 5);
  const auto [dcov, dcor] = dcov_dcor_baseline(sm);
  CHECK(dcor.value < 0.15);
}

TEST_CASE("dcov baseline guards") {
  const PairedSample sm = random_sample(10, 1, 41);
  CHECK_THROWS_AS(dcov_dcor_baseline(sm, 0.5), ValidationError);
}

TEST_CASE("pearson baseline") {
  Matrix x(5, 1), y(5, 1);
  x << 1, 2, 3, 4, 7;
  y = 2.0 * x;
  y.array() += 1.0;
  CHECK(pearson_baseline(PairedSample(x, y)).value == doctest::Approx(1.0).epsilon(1e-14));

  y = -x;
  CHECK(pearson_baseline(PairedSample(x, y)).value == doctest::Approx(-1.0).epsilon(1e-14));

  // direct arithmetic oracle on a fixed 5-point set
  x << 1, 2, 3, 4, 5;
  y << 2, 1, 4, 3, 6;
  double mx = 3, my = 3.2, sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 5; ++i) {
    sxy += (x(i, 0) - mx) * (y(i, 0) - my);
    sxx += (x(i, 0) - mx) * (x(i, 0) - mx);
    syy += (y(i, 0) - my) * (y(i, 0) - my);
  }
  CHECK(pearson_baseline(PairedSample(x, y)).value ==
        doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-14));

  Matrix yc(5, 1);
  yc.setConstant(1.0);
  CHECK_THROWS_AS(pearson_baseline(PairedSample(x, yc)), NumericError);
  const PairedSample wide = random_sample(5, 2, 43);
  CHECK_THROWS_AS(pearson_baseline(wide), ValidationError);
}
