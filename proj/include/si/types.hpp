#pragma once

#include <Eigen/Dense>

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace si {

// Row-major so that observation rows are contiguous in memory.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Invalid input (bad file, bad flag, out-of-range parameter). CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric failure on otherwise valid input (degenerate denominator,
/// quadrature tolerance not reached). CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n paired observations (x_i, y_i), both margins in R^p.
/// Immutable after construction; safe to share across threads.
class PairedSample {
 public:
  PairedSample(Matrix x, Matrix y);

  const Matrix& x() const { return x_; }
  const Matrix& y() const { return y_; }
  Index n() const { return x_.rows(); }
  Index p() const { return x_.cols(); }

  bool x_constant() const;  // all x rows identical
  bool y_constant() const;

 private:
  Matrix x_;
  Matrix y_;
};

enum class AlphaContext { general, cauchy_margin };

/// Exponent of the weight |t|^{-alpha-p}; restricted to (0,2), and to (0,1)
/// in the Cauchy-margin context where E|X|^alpha is finite only below 1.
class AlphaParam {
 public:
  explicit AlphaParam(double alpha, AlphaContext context = AlphaContext::general);
  double value() const { return alpha_; }

 private:
  double alpha_;
};

AlphaParam validate_alpha(double alpha, AlphaContext context = AlphaContext::general);

enum class EstimatorMode {
  auto_select,   // u_complete when n <= exact_threshold_n, else u_incomplete
  u_complete,    // exact average over all distinct index tuples
  u_incomplete,  // seeded uniform subsample of distinct tuples, tuple_budget per term
  v_fast,        // with-repetition V-statistic, 1-D alpha=1 sort/prefix-sum path
};

const char* mode_name(EstimatorMode mode);

struct EstimatorConfig {
  EstimatorMode mode = EstimatorMode::auto_select;
  std::uint64_t tuple_budget = 200000;  // per term, u_incomplete only
  std::uint64_t seed = kDefaultSeed;
  Index exact_threshold_n = 40;
  int threads = 1;
  bool clamp_sicor = false;

  static constexpr std::uint64_t kDefaultSeed = 42;
};

/// Resolves auto_select against the sample size. Other modes pass through.
EstimatorMode resolve_mode(const EstimatorConfig& config, Index n);

/// The six empirical moments of the covariance/correlation representation.
/// U mode averages over all-distinct index tuples, V mode with repetition.
struct TermStatistics {
  double j1 = 0;  // avg |x_i + y_i - x_j - y_k|^alpha, (i,j,k)
  double j2 = 0;  // avg |x_i + y_j - x_k - y_l|^alpha, (i,j,k,l)
  double j3 = 0;  // avg |x_i + y_i - x_j - y_j|^alpha, (i,j)
  double k1 = 0;  // avg |x_i - x_j|^alpha
  double k2 = 0;  // avg |y_k - y_l|^alpha
  double k3 = 0;  // avg |x_i - x_j + y_k - y_l|^alpha, (i,j,k,l)
  std::array<std::uint64_t, 6> tuples_used{};
  char mode = 'U';  // 'U' or 'V'
  double alpha = 1.0;

  double numerator() const { return 2.0 * j1 - j2 - j3; }
  double denominator() const { return k1 + k2 - k3; }
};

enum class EstimateKind { sicov, sicor, dcov, dcor, pearson };

const char* kind_name(EstimateKind kind);

struct IntervalEstimate {
  double lower = 0;
  double upper = 0;
  double level = 0;
};

struct DependenceEstimate {
  double value = 0;
  EstimateKind kind = EstimateKind::sicov;
  double alpha = 1.0;
  EstimatorMode mode = EstimatorMode::u_complete;
  Index n = 0;
  std::optional<IntervalEstimate> ci;
  std::vector<std::string> warnings;
};

struct EstimatorReport {
  DependenceEstimate estimate;
  TermStatistics terms;
  std::chrono::duration<double> elapsed{0};
  std::optional<double> denominator;  // sicor only
};

}  // namespace si
