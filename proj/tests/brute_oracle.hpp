#pragma once

// Independent brute-force evaluation of the six moment terms by direct tuple
// enumeration. Deliberately shares no code with the library paths it checks.

#include <cmath>
#include <vector>

#include "si/types.hpp"

namespace brute {

struct Terms {
  double j1 = 0, j2 = 0, j3 = 0, k1 = 0, k2 = 0, k3 = 0;

  double sicov() const { return 2 * j1 - j2 - j3; }
  double denominator() const { return k1 + k2 - k3; }
};

inline double norm_pow(const std::vector<double>& v, double alpha) {
  double s = 0;
  for (const double t : v) s += t * t;
  s = std::sqrt(s);
  return s == 0 ? 0 : std::pow(s, alpha);
}

// distinct=true: U statistic over all-distinct ordered tuples;
// distinct=false: V statistic with repetition.
inline Terms enumerate_terms(const si::PairedSample& sm, double alpha, bool distinct) {
  const int n = static_cast<int>(sm.n());
  const int p = static_cast<int>(sm.p());
  const auto X = [&](int i, int q) { return sm.x()(i, q); };
  const auto Y = [&](int i, int q) { return sm.y()(i, q); };

  Terms t;
  std::vector<double> buf(p);
  double pairs = 0, triples = 0, quads = 0;

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (distinct && j == i) continue;
      for (int q = 0; q < p; ++q) buf[q] = X(i, q) + Y(i, q) - X(j, q) - Y(j, q);
      t.j3 += norm_pow(buf, alpha);
      for (int q = 0; q < p; ++q) buf[q] = X(i, q) - X(j, q);
      t.k1 += norm_pow(buf, alpha);
      for (int q = 0; q < p; ++q) buf[q] = Y(i, q) - Y(j, q);
      t.k2 += norm_pow(buf, alpha);
      pairs += 1;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (distinct && j == i) continue;
      for (int k = 0; k < n; ++k) {
        if (distinct && (k == i || k == j)) continue;
        for (int q = 0; q < p; ++q) buf[q] = X(i, q) + Y(i, q) - X(j, q) - Y(k, q);
        t.j1 += norm_pow(buf, alpha);
        triples += 1;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (distinct && j == i) continue;
      for (int k = 0; k < n; ++k) {
        if (distinct && (k == i || k == j)) continue;
        for (int l = 0; l < n; ++l) {
          if (distinct && (l == i || l == j || l == k)) continue;
          for (int q = 0; q < p; ++q) buf[q] = X(i, q) + Y(j, q) - X(k, q) - Y(l, q);
          t.j2 += norm_pow(buf, alpha);
          for (int q = 0; q < p; ++q) buf[q] = X(i, q) - X(j, q) + Y(k, q) - Y(l, q);
          t.k3 += norm_pow(buf, alpha);
          quads += 1;
        }
      }
    }
  }
  t.j1 /= triples;
  t.j2 /= quads;
  t.j3 /= pairs;
  t.k1 /= pairs;
  t.k2 /= pairs;
  t.k3 /= quads;
  return t;
}

}  // namespace brute
