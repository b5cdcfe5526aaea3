#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "si/inference.hpp"
#include "si/estimators.hpp"
#include "si/oracle.hpp"
#include "si/rng.hpp"
#include "si/simulate.hpp"

using namespace si;

namespace {

EstimatorConfig vfast_config(std::uint64_t seed = 42) {
  EstimatorConfig c;
  c.mode = EstimatorMode::v_fast;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("generators are deterministic per (seed, replicate)") {
  const auto gen = bivariate_normal_sampler(0.3);
  const PairedSample a = draw_sample(gen, 50, 9, 1);
  const PairedSample b = draw_sample(gen, 50, 9, 1);
  CHECK(a.x() == b.x());
  CHECK(a.y() == b.y());
  const PairedSample c = draw_sample(gen, 50, 9, 2);
  CHECK(a.x() != c.x());
  CHECK_THROWS_AS(bivariate_normal_sampler(1.5), ValidationError);
}

TEST_CASE("random orthonormal matrices are orthonormal") {
  const Matrix q = random_orthonormal(3, 4);
  CHECK(((q.transpose() * q) - Matrix::Identity(3, 3)).norm() <= 1e-12);
}

TEST_CASE("permutation test is reproducible bit for bit") {
  const PairedSample sm = draw_sample(bivariate_normal_sampler(0.4), 60, 11);
  const auto a = permutation_test(sm, AlphaParam(1.0), 99, 0.05, vfast_config(3));
  const auto b = permutation_test(sm, AlphaParam(1.0), 99, 0.05, vfast_config(3));
  CHECK(a.statistic == b.statistic);
  CHECK(a.p_value == b.p_value);
  CHECK(a.replicates == b.replicates);
  CHECK(a.seed == 3);

  const auto other = permutation_test(sm, AlphaParam(1.0), 99, 0.05, vfast_config(4));
  CHECK(a.replicates != other.replicates);
}

TEST_CASE("permutation test statistic matches n * sicov_hat") {
  const PairedSample sm = draw_sample(bivariate_normal_sampler(0.4), 80, 13);
  const auto config = vfast_config();
  const auto result = permutation_test(sm, AlphaParam(1.0), 49, 0.05, config);
  const double direct = sicov_hat(sm, AlphaParam(1.0), config).estimate.value;
  CHECK(result.statistic ==
        doctest::Approx(static_cast<double>(sm.n()) * direct).epsilon(1e-12));
}

TEST_CASE("p-value follows the add-one convention") {
  const PairedSample sm = draw_sample(independent_normal_sampler(), 40, 17);
  const auto r = permutation_test(sm, AlphaParam(1.0), 199, 0.05, vfast_config());
  std::size_t count = 0;
  for (const double v : r.replicates) {
    if (v >= r.statistic) ++count;
  }
  CHECK(r.p_value == static_cast<double>(1 + count) / 200.0);
  CHECK(r.p_value > 0.0);
  CHECK(r.p_value <= 1.0);
  CHECK(r.reject == (r.p_value <= 0.05));
}

TEST_CASE("identical pairing is overwhelmingly rejected") {
  const PairedSample sm = draw_sample(rademacher_pair_sampler(), 100, 19);
  const auto r = permutation_test(sm, AlphaParam(1.0), 999, 0.05, vfast_config());
  CHECK(r.p_value <= 0.001);
  CHECK(r.reject);
}

TEST_CASE("the generic (u-mode) path agrees with its estimator") {
  const PairedSample sm = draw_sample(bivariate_normal_sampler(0.5), 16, 23);
  EstimatorConfig config;
  config.mode = EstimatorMode::u_complete;
  const auto r = permutation_test(sm, AlphaParam(1.0), 19, 0.05, config);
  const double direct = sicov_hat(sm, AlphaParam(1.0), config).estimate.value;
  CHECK(r.statistic == 16.0 * direct);
  CHECK(r.replicates.size() == 19);
}

TEST_CASE("permutation test input guards") {
  const PairedSample sm = draw_sample(independent_normal_sampler(), 30, 29);
  CHECK_THROWS_AS(permutation_test(sm, AlphaParam(1.0), 5, 0.05, vfast_config()),
                  ValidationError);
  CHECK_THROWS_AS(permutation_test(sm, AlphaParam(1.0), 99, 0.0, vfast_config()),
                  ValidationError);
  const PairedSample tiny = draw_sample(independent_normal_sampler(), 3, 29);
  CHECK_THROWS_AS(permutation_test(tiny, AlphaParam(1.0), 99, 0.05, vfast_config()),
                  ValidationError);
}

TEST_CASE("statistic is invariant under row relabeling") {
  const PairedSample sm = draw_sample(bivariate_normal_sampler(0.6), 50, 31);
  Rng rng(5);
  const auto perm = rng.permutation(50);
  Matrix x(50, 1), y(50, 1);
  for (Index i = 0; i < 50; ++i) {
    x(i, 0) = sm.x()(static_cast<Index>(perm[static_cast<std::size_t>(i)]), 0);
    y(i, 0) = sm.y()(static_cast<Index>(perm[static_cast<std::size_t>(i)]), 0);
  }
  const PairedSample relabeled(x, y);
  const auto a = permutation_test(sm, AlphaParam(1.0), 199, 0.05, vfast_config());
  const auto b = permutation_test(relabeled, AlphaParam(1.0), 199, 0.05, vfast_config());
  CHECK(a.statistic == doctest::Approx(b.statistic).epsilon(1e-12));
  // The replicate pool is resampled, so p-values agree only up to Monte Carlo
  // error of the permutation draw.
  CHECK(std::abs(a.p_value - b.p_value) <= 0.15);
}

TEST_CASE("asymptotic interval on dependent data covers the closed form") {
  const double target = normal_closed_form(0.9).sicov;
  const PairedSample sm = draw_sample(bivariate_normal_sampler(0.9), 160, 37);
  EstimatorConfig config;
  config.mode = EstimatorMode::u_incomplete;
  config.tuple_budget = 40000;
  config.seed = 11;
  const auto ci = asymptotic_ci(sm, AlphaParam(1.0), 0.95, 128, config);
  CHECK(ci.lower <= ci.upper);
  CHECK(ci.variance_hat > 0);
  CHECK(ci.lower <= target);
  CHECK(ci.upper >= target);
  CHECK(ci.level == 0.95);
}

TEST_CASE("asymptotic interval is reproducible") {
  const PairedSample sm = draw_sample(bivariate_normal_sampler(0.7), 80, 41);
  EstimatorConfig config;
  config.mode = EstimatorMode::u_incomplete;
  config.tuple_budget = 20000;
  config.seed = 13;
  const auto a = asymptotic_ci(sm, AlphaParam(1.0), 0.9, 64, config);
  const auto b = asymptotic_ci(sm, AlphaParam(1.0), 0.9, 64, config);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
  CHECK(a.variance_hat == b.variance_hat);
}

TEST_CASE("degeneracy warning fires under independence") {
  const PairedSample sm = draw_sample(independent_normal_sampler(), 200, 43);
  const auto ci = asymptotic_ci(sm, AlphaParam(1.0), 0.95, 96, vfast_config(7));
  REQUIRE_FALSE(ci.warnings.empty());
  CHECK(ci.warnings[0].find("degenerate") != std::string::npos);
}

TEST_CASE("constant sample collapses the interval to [0,0]") {
  Matrix x(10, 1), y(10, 1);
  x.setConstant(1.0);
  y.setConstant(2.0);
  const auto ci = asymptotic_ci(PairedSample(x, y), AlphaParam(1.0), 0.95, 32, vfast_config());
  CHECK(ci.lower == 0.0);
  CHECK(ci.upper == 0.0);
  REQUIRE_FALSE(ci.warnings.empty());
  CHECK(ci.warnings[0].find("constant") != std::string::npos);
}

TEST_CASE("asymptotic_ci guards") {
  const PairedSample tiny = draw_sample(independent_normal_sampler(), 6, 47);
  CHECK_THROWS_AS(asymptotic_ci(tiny, AlphaParam(1.0), 0.95, 32, vfast_config()),
                  ValidationError);
}

TEST_CASE("interval width shrinks like n^{-1/2}") {
  const auto gen = bivariate_normal_sampler(0.5);
  const auto median_width = [&](Index n) {
    std::vector<double> widths;
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
      const PairedSample sm = draw_sample(gen, n, 53, rep);
      EstimatorConfig config;
      config.mode = EstimatorMode::v_fast;
      config.seed = rep + 1;
      const auto ci = asymptotic_ci(sm, AlphaParam(1.0), 0.95, 48, config);
      widths.push_back(ci.upper - ci.lower);
    }
    std::nth_element(widths.begin(), widths.begin() + 25, widths.end());
    return widths[25];
  };
  const double w400 = median_width(400);
  const double w1600 = median_width(1600);
  CHECK(w1600 / w400 >= 0.4);
  CHECK(w1600 / w400 <= 0.6);
}

TEST_CASE("null simulation wiring and shape") {
  const auto gen = independent_rademacher_sampler();
  const auto values =
      null_distribution_sim(gen, 100, 100, AlphaParam(1.0), 59, vfast_config());
  CHECK(values.size() == 100);

  const auto larger =
      null_distribution_sim(gen, 200, 400, AlphaParam(1.0), 61, vfast_config());
  CHECK(sample_skewness(larger) > 0.0);

  CHECK_THROWS_AS(null_distribution_sim(gen, 100, 99, AlphaParam(1.0), 1, vfast_config()),
                  ValidationError);
}

TEST_CASE("null simulation shifts under dependence") {
  const auto gen = bivariate_normal_sampler(0.9);
  const auto values =
      null_distribution_sim(gen, 400, 200, AlphaParam(1.0), 67, vfast_config());
  const double target = std::sqrt(400.0) * normal_closed_form(0.9).sicov;
  double mean = 0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double sd = 0;
  for (const double v : values) sd += (v - mean) * (v - mean);
  sd = std::sqrt(sd / static_cast<double>(values.size() - 1));
  CHECK(std::abs(mean - target) <= 4.0 * sd / std::sqrt(200.0) + 0.05 * target);
}

TEST_CASE("moment summaries and the normality statistic") {
  Rng rng(71);
  std::vector<double> normal_draws(3000);
  for (auto& v : normal_draws) v = rng.normal();
  CHECK(std::abs(sample_skewness(normal_draws)) < 0.2);
  CHECK(jarque_bera(normal_draws) < 9.21);  // chi^2(2) critical value at 1%

  std::vector<double> skewed(3000);
  for (auto& v : skewed) v = -std::log(rng.uniform01());
  CHECK(sample_skewness(skewed) > 1.0);
  CHECK(jarque_bera(skewed) > 9.21);
}

TEST_CASE("normal quantile accuracy") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
  CHECK(std::abs(normal_quantile(1e-10) + normal_quantile(1 - 1e-10)) < 5e-8);
  CHECK_THROWS_AS(normal_quantile(0.0), ValidationError);
  CHECK_THROWS_AS(normal_quantile(1.0), ValidationError);
}
