#include "si/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "parallel_util.hpp"
#include "si/rng.hpp"

namespace si {

WeightConstant c_const(int p, double alpha) {
  if (p < 1) throw ValidationError("c_const: p must be >= 1");
  validate_alpha(alpha);  // rejects the Gamma(1 - alpha/2) pole at alpha = 2
  const double value = 2.0 * std::pow(M_PI, 0.5 * p) * std::tgamma(1.0 - 0.5 * alpha) /
                       (alpha * std::pow(2.0, alpha) * std::tgamma(0.5 * (alpha + p)));
  return WeightConstant{p, alpha, value};
}

namespace {

// Every term of the moment representation is |x_a - x_b + y_c - y_d|^alpha
// for some index pattern; pair terms reuse the same primitive with a
// cancelling index (e.g. K1 = f(i,j,0,0)).
struct ScalarCombo {  // p == 1
  const double* x;
  const double* y;
  double alpha;
  bool unit;  // alpha == 1

  double operator()(Index a, Index b, Index c, Index d) const {
    const double v = std::abs(x[a] - x[b] + y[c] - y[d]);
    if (unit || v == 0.0) return v;
    return std::pow(v, alpha);
  }
};

struct RowCombo {  // general p
  const Matrix* x;
  const Matrix* y;
  double alpha;
  bool unit;

  double operator()(Index a, Index b, Index c, Index d) const {
    double s = 0;
    const Index p = x->cols();
    for (Index q = 0; q < p; ++q) {
      const double t = (*x)(a, q) - (*x)(b, q) + (*y)(c, q) - (*y)(d, q);
      s += t * t;
    }
    if (s == 0.0) return 0.0;
    return unit ? std::sqrt(s) : std::pow(s, 0.5 * alpha);
  }
};

// Index patterns:
//   J1 = f(i,j,i,k) over distinct (i,j,k)      |x_i + y_i - x_j - y_k|
//   J2 = f(i,k,j,l) over distinct (i,j,k,l)    |x_i + y_j - x_k - y_l|
//   J3 = f(i,j,i,j) over i != j
//   K1 = f(i,j,0,0), K2 = f(0,0,k,l)
//   K3 = f(i,j,k,l) over distinct (i,j,k,l)

template <typename Combo>
TermStatistics complete_u_terms(Index n, const Combo& f, double alpha) {
  TermStatistics t;
  t.mode = 'U';
  t.alpha = alpha;

  double j1 = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      for (Index k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        j1 += f(i, j, i, k);
      }
    }
  }
  const auto triples = static_cast<std::uint64_t>(n) * (n - 1) * (n - 2);
  t.j1 = j1 / static_cast<double>(triples);

  double j3 = 0, k1 = 0, k2 = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      j3 += f(i, j, i, j);
      k1 += f(i, j, 0, 0);
      k2 += f(0, 0, i, j);
    }
  }
  const auto pairs = static_cast<std::uint64_t>(n) * (n - 1);
  t.j3 = j3 / static_cast<double>(pairs);
  t.k1 = k1 / static_cast<double>(pairs);
  t.k2 = k2 / static_cast<double>(pairs);

  double j2 = 0, k3 = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      for (Index k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        for (Index l = 0; l < n; ++l) {
          if (l == i || l == j || l == k) continue;
          j2 += f(i, k, j, l);
          k3 += f(i, j, k, l);
        }
      }
    }
  }
  const auto quads = triples * static_cast<std::uint64_t>(n - 3);
  t.j2 = j2 / static_cast<double>(quads);
  t.k3 = k3 / static_cast<double>(quads);

  t.tuples_used = {triples, quads, pairs, pairs, pairs, quads};
  return t;
}

enum class Pattern { j1, j2, j3, k1, k2, k3 };

template <typename Combo>
double apply_pattern(const Combo& f, Pattern pat, Index i, Index j, Index k, Index l) {
  switch (pat) {
    case Pattern::j1: return f(i, j, i, k);
    case Pattern::j2: return f(i, k, j, l);
    case Pattern::j3: return f(i, j, i, j);
    case Pattern::k1: return f(i, j, 0, 0);
    case Pattern::k2: return f(0, 0, i, j);
    case Pattern::k3: return f(i, j, k, l);
  }
  return 0;
}

constexpr int pattern_arity(Pattern pat) {
  switch (pat) {
    case Pattern::j1: return 3;
    case Pattern::j2:
    case Pattern::k3: return 4;
    default: return 2;
  }
}

// Budgeted mean over seeded distinct-index tuples. The budget is cut into
// fixed chunks, chunk c drawing from substream (seed, term, c); partial sums
// are reduced in chunk order, so the result does not depend on thread count.
template <typename Combo>
double incomplete_term_mean(Index n, const Combo& f, Pattern pat, std::uint64_t budget,
                            std::uint64_t seed, std::uint64_t term_id, int threads) {
  constexpr std::uint64_t kChunk = 65536;
  const std::uint64_t chunks = (budget + kChunk - 1) / kChunk;
  const auto un = static_cast<std::uint64_t>(n);
  const int arity = pattern_arity(pat);

  auto chunk_sum = [&](std::size_t c) -> double {
    Rng rng(substream_seed(seed, term_id, c));
    const std::uint64_t count = std::min(kChunk, budget - c * kChunk);
    double acc = 0;
    for (std::uint64_t t = 0; t < count; ++t) {
      Index idx[4] = {0, 0, 0, 0};
      for (int a = 0; a < arity; ++a) {
        Index v;
        bool collide;
        do {
          v = static_cast<Index>(rng.uniform_index(un));
          collide = false;
          for (int b = 0; b < a; ++b) collide |= (idx[b] == v);
        } while (collide);
        idx[a] = v;
      }
      acc += apply_pattern(f, pat, idx[0], idx[1], idx[2], idx[3]);
    }
    return acc;
  };

  const auto partials = detail::ordered_parallel_map(chunks, threads, chunk_sum);
  double total = 0;
  for (const double v : partials) total += v;
  return total / static_cast<double>(budget);
}

template <typename Combo>
TermStatistics incomplete_u_terms(Index n, const Combo& f, double alpha,
                                  const EstimatorConfig& config) {
  const std::uint64_t budget = config.tuple_budget;
  TermStatistics t;
  t.mode = 'U';
  t.alpha = alpha;
  t.j1 = incomplete_term_mean(n, f, Pattern::j1, budget, config.seed, stream::term_j1,
                              config.threads);
  t.j2 = incomplete_term_mean(n, f, Pattern::j2, budget, config.seed, stream::term_j2,
                              config.threads);
  t.j3 = incomplete_term_mean(n, f, Pattern::j3, budget, config.seed, stream::term_j3,
                              config.threads);
  t.k1 = incomplete_term_mean(n, f, Pattern::k1, budget, config.seed, stream::term_k1,
                              config.threads);
  t.k2 = incomplete_term_mean(n, f, Pattern::k2, budget, config.seed, stream::term_k2,
                              config.threads);
  t.k3 = incomplete_term_mean(n, f, Pattern::k3, budget, config.seed, stream::term_k3,
                              config.threads);
  t.tuples_used = {budget, budget, budget, budget, budget, budget};
  return t;
}

// --- 1-D alpha=1 V-statistic path ---------------------------------------

// Mean of |u_i - u_j| over all ordered pairs (repetition included).
double pair_abs_mean(std::vector<double> u) {
  const std::size_t n = u.size();
  std::sort(u.begin(), u.end());
  double acc = 0;
  double prefix = 0;
  for (std::size_t i = 0; i < n; ++i) {
    // sum_{j<i} (u_i - u_j), doubled below for ordered pairs
    acc += u[i] * static_cast<double>(i) - prefix;
    prefix += u[i];
  }
  return 2.0 * acc / (static_cast<double>(n) * static_cast<double>(n));
}

// Sum over q in queries, v in values of |q - v|; both ascending.
double sorted_cross_abs_sum(const std::vector<double>& queries,
                            const std::vector<double>& values) {
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  const std::size_t m = values.size();
  double acc = 0;
  double below = 0;
  std::size_t k = 0;
  for (const double q : queries) {
    while (k < m && values[k] <= q) {
      below += values[k];
      ++k;
    }
    acc += q * static_cast<double>(k) - below + (total - below) -
           q * static_cast<double>(m - k);
  }
  return acc;
}

// Total |u_i - u_j| over all ordered pairs, repetition included.
double pair_abs_total(std::vector<double> u) {
  const std::size_t n = u.size();
  std::sort(u.begin(), u.end());
  double acc = 0;
  double prefix = 0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += u[i] * static_cast<double>(i) - prefix;
    prefix += u[i];
  }
  return 2.0 * acc;
}

// Exact complete-U terms for p = 1, alpha = 1 in O(n^2 log n): the
// with-repetition sums are computed by the sort/prefix decompositions, and
// every index-coincidence stratum of the distinct-tuple sums reduces to a
// pair- or triple-type sum, removed by Moebius inclusion-exclusion over the
// partitions of the index set. Equality with direct enumeration is tested.
TermStatistics exact_u_terms_1d(const PairedSample& sample) {
  const Index n = sample.n();
  const auto un = static_cast<std::uint64_t>(n);
  const double* xs = sample.x().data();
  const double* ys = sample.y().data();
  const double dn = static_cast<double>(n);

  std::vector<double> x(xs, xs + n), y(ys, ys + n), s(n), u(n);
  for (Index i = 0; i < n; ++i) {
    s[i] = xs[i] + ys[i];
    u[i] = xs[i] - ys[i];
  }

  const double px = pair_abs_total(x);
  const double py = pair_abs_total(y);
  const double ps = pair_abs_total(s);
  const double pu = pair_abs_total(u);

  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  double td = 0;  // sum_{a,(j,k)} |s_a - (x_j + y_k)|
  {
    std::vector<double> d;
    d.reserve(nn);
    for (Index j = 0; j < n; ++j) {
      for (Index k = 0; k < n; ++k) d.push_back(xs[j] + ys[k]);
    }
    std::sort(d.begin(), d.end());
    std::vector<double> q(s);
    std::sort(q.begin(), q.end());
    td = sorted_cross_abs_sum(q, d);
  }
  double te = 0;  // sum_{a,(k,j)} |u_a - (x_k - y_j)|
  {
    std::vector<double> e;
    e.reserve(nn);
    for (Index k = 0; k < n; ++k) {
      for (Index j = 0; j < n; ++j) e.push_back(xs[k] - ys[j]);
    }
    std::sort(e.begin(), e.end());
    std::vector<double> q(u);
    std::sort(q.begin(), q.end());
    te = sorted_cross_abs_sum(q, e);
  }
  double q_all = 0;  // sum over all (i,j,k,l) of |x_i + y_j - x_k - y_l|
  {
    std::vector<double> a, b;
    a.reserve(nn);
    b.reserve(nn);
    for (Index i = 0; i < n; ++i) {
      for (Index k = 0; k < n; ++k) {
        a.push_back(-(xs[i] - xs[k]));
        b.push_back(ys[i] - ys[k]);
      }
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    q_all = sorted_cross_abs_sum(a, b);
  }

  const double triples = dn * (dn - 1) * (dn - 2);
  const double quads = triples * (dn - 3);
  const double pairs = dn * (dn - 1);

  TermStatistics t;
  t.mode = 'U';
  t.alpha = 1.0;
  // distinct triples: subtract the i=j, i=k, j=k strata (the fully merged
  // stratum is zero)
  t.j1 = (td - py - px - ps) / triples;
  // distinct quadruples of |x_i + y_j - x_k - y_l|; K3's functional is the
  // same multiset under (j <-> k) relabeling
  t.j2 = (q_all - 2 * td - 2 * te - dn * px - dn * py + ps + pu + 4 * px + 4 * py) / quads;
  t.k3 = t.j2;
  t.j3 = ps / pairs;
  t.k1 = px / pairs;
  t.k2 = py / pairs;
  t.tuples_used = {un * (un - 1) * (un - 2),
                   un * (un - 1) * (un - 2) * (un - 3),
                   un * (un - 1),
                   un * (un - 1),
                   un * (un - 1),
                   un * (un - 1) * (un - 2) * (un - 3)};
  return t;
}

// Above this size the closed decomposition replaces O(n^4) enumeration.
constexpr Index kExactFastMinN = 64;

}  // namespace

TermStatistics term_statistics_v_fast_1d(const PairedSample& sample) {
  if (sample.p() != 1) throw ValidationError("v-fast path requires p = 1");
  const Index n = sample.n();
  const auto un = static_cast<std::uint64_t>(n);
  const double* xs = sample.x().data();
  const double* ys = sample.y().data();

  TermStatistics t;
  t.mode = 'V';
  t.alpha = 1.0;

  std::vector<double> s(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = xs[i] + ys[i];

  t.k1 = pair_abs_mean(std::vector<double>(xs, xs + n));
  t.k2 = pair_abs_mean(std::vector<double>(ys, ys + n));
  t.j3 = pair_abs_mean(s);

  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  const double quad_count = static_cast<double>(nn) * static_cast<double>(nn);

  {
    // J2 = K3 = mean |a + b| over a in {x_i - x_k}, b in {y_j - y_l}:
    // the two terms enumerate the same multiset of values in V convention.
    std::vector<double> a, b;
    a.reserve(nn);
    b.reserve(nn);
    for (Index i = 0; i < n; ++i) {
      for (Index k = 0; k < n; ++k) {
        a.push_back(-(xs[i] - xs[k]));  // negated: |a+b| = |b - (-a)|
        b.push_back(ys[i] - ys[k]);
      }
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double cross = sorted_cross_abs_sum(a, b);
    t.j2 = cross / quad_count;
    t.k3 = t.j2;
  }

  {
    // J1 = mean over i,(j,k) of |s_i - (x_j + y_k)|
    std::vector<double> d;
    d.reserve(nn);
    for (Index j = 0; j < n; ++j) {
      for (Index k = 0; k < n; ++k) d.push_back(xs[j] + ys[k]);
    }
    std::sort(d.begin(), d.end());
    std::vector<double> q(s);
    std::sort(q.begin(), q.end());
    t.j1 = sorted_cross_abs_sum(q, d) /
           (static_cast<double>(n) * static_cast<double>(nn));
  }

  // order: j1, j2, j3, k1, k2, k3
  t.tuples_used = {un * un * un, un * un * un * un, un * un,
                   un * un,      un * un,           un * un * un * un};
  return t;
}

TermStatistics term_statistics(const PairedSample& sample, const AlphaParam& alpha,
                               const EstimatorConfig& config) {
  const Index n = sample.n();
  const EstimatorMode mode = resolve_mode(config, n);

  if (mode == EstimatorMode::v_fast) {
    if (alpha.value() != 1.0) {
      throw ValidationError(
          "v-fast mode evaluates the prefix-sum decomposition, which exists only for "
          "alpha = 1; use u or u-incomplete for other alpha");
    }
    return term_statistics_v_fast_1d(sample);
  }

  if (n < 4) {
    std::ostringstream msg;
    msg << "U-statistic terms need n >= 4 distinct rows (J2 averages quadruples), got n = " << n;
    throw ValidationError(msg.str());
  }

  const bool unit = alpha.value() == 1.0;
  if (mode == EstimatorMode::u_complete) {
    if (sample.p() == 1 && unit && n > kExactFastMinN) {
      return exact_u_terms_1d(sample);
    }
    if (sample.p() == 1) {
      const ScalarCombo f{sample.x().data(), sample.y().data(), alpha.value(), unit};
      return complete_u_terms(n, f, alpha.value());
    }
    const RowCombo f{&sample.x(), &sample.y(), alpha.value(), unit};
    return complete_u_terms(n, f, alpha.value());
  }

  if (config.tuple_budget < 1) throw ValidationError("tuple_budget must be >= 1");
  if (sample.p() == 1) {
    const ScalarCombo f{sample.x().data(), sample.y().data(), alpha.value(), unit};
    return incomplete_u_terms(n, f, alpha.value(), config);
  }
  const RowCombo f{&sample.x(), &sample.y(), alpha.value(), unit};
  return incomplete_u_terms(n, f, alpha.value(), config);
}

namespace {

template <typename Combo>
double kernel_eval(const Combo& f, const std::array<Index, 4>& id) {
  double t1 = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      for (int k = 0; k < 4; ++k) {
        if (k == i || k == j) continue;
        t1 += f(id[i], id[j], id[i], id[k]);
      }
    }
  }
  double t2 = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      for (int k = 0; k < 4; ++k) {
        if (k == i || k == j) continue;
        const int l = 6 - i - j - k;
        t2 += f(id[i], id[k], id[j], id[l]);
      }
    }
  }
  double t3 = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      t3 += f(id[i], id[j], id[i], id[j]);
    }
  }
  return t1 / 12.0 - t2 / 24.0 - t3 / 12.0;
}

}  // namespace

double kernel_k(const PairedSample& sample, Index a, Index b, Index c, Index d,
                double alpha) {
  const std::array<Index, 4> id{a, b, c, d};
  if (sample.p() == 1) {
    const ScalarCombo f{sample.x().data(), sample.y().data(), alpha, alpha == 1.0};
    return kernel_eval(f, id);
  }
  const RowCombo f{&sample.x(), &sample.y(), alpha, alpha == 1.0};
  return kernel_eval(f, id);
}

double kernel_k(const PairedSample& quad, double alpha) {
  if (quad.n() != 4) throw ValidationError("kernel_k expects exactly four paired rows");
  validate_alpha(alpha);
  return kernel_k(quad, 0, 1, 2, 3, alpha);
}

namespace {

double triples_available(Index n) {
  const double m = static_cast<double>(n - 1);
  return m * (m - 1.0) * (m - 2.0) / 6.0;
}

}  // namespace

K1Stats k1_hat_stats(const PairedSample& sample, Index i, double alpha,
                     std::uint64_t budget, std::uint64_t seed) {
  const Index n = sample.n();
  if (n < 4) throw ValidationError("k1_hat needs n >= 4");
  if (i < 0 || i >= n) throw ValidationError("k1_hat: row index out of range");
  if (budget < 1) throw ValidationError("k1_hat: budget must be >= 1");

  // Welford accumulation of the kernel draws.
  double mean = 0, m2 = 0;
  std::uint64_t count = 0;
  auto push = [&](double v) {
    ++count;
    const double d1 = v - mean;
    mean += d1 / static_cast<double>(count);
    m2 += d1 * (v - mean);
  };

  if (static_cast<double>(budget) >= triples_available(n)) {
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      for (Index k = j + 1; k < n; ++k) {
        if (k == i) continue;
        for (Index l = k + 1; l < n; ++l) {
          if (l == i) continue;
          push(kernel_k(sample, i, j, k, l, alpha));
        }
      }
    }
  } else {
    Rng rng(substream_seed(seed, stream::k1_projection, static_cast<std::uint64_t>(i)));
    const auto un = static_cast<std::uint64_t>(n);
    for (std::uint64_t t = 0; t < budget; ++t) {
      Index j, k, l;
      do { j = static_cast<Index>(rng.uniform_index(un)); } while (j == i);
      do { k = static_cast<Index>(rng.uniform_index(un)); } while (k == i || k == j);
      do { l = static_cast<Index>(rng.uniform_index(un)); } while (l == i || l == j || l == k);
      push(kernel_k(sample, i, j, k, l, alpha));
    }
  }

  K1Stats out;
  out.mean = mean;
  out.within_variance = count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  out.used = count;
  return out;
}

double k1_hat(const PairedSample& sample, Index i, double alpha, std::uint64_t budget,
              std::uint64_t seed) {
  return k1_hat_stats(sample, i, alpha, budget, seed).mean;
}

}  // namespace si
