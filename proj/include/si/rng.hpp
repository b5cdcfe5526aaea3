#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace si {

// Every random draw in the library goes through Rng seeded via substream_seed,
// so results are bit-reproducible across platforms and worker counts.
// Recorded in CLI output so runs stay reproducible across releases.
inline constexpr const char* kRngAlgorithm = "mt19937_64/lemire/box-muller:1";

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream key from (seed, a, b, c). Streams used by
/// different terms, replicates, or chunks never share state.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a,
                                       std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

// Stream ids. Fixed constants: changing them changes every seeded result.
namespace stream {
inline constexpr std::uint64_t term_j1 = 1;
inline constexpr std::uint64_t term_j2 = 2;
inline constexpr std::uint64_t term_j3 = 3;
inline constexpr std::uint64_t term_k1 = 4;
inline constexpr std::uint64_t term_k2 = 5;
inline constexpr std::uint64_t term_k3 = 6;
inline constexpr std::uint64_t permutation = 101;
inline constexpr std::uint64_t k1_projection = 102;
inline constexpr std::uint64_t generator = 103;
inline constexpr std::uint64_t bootstrap = 104;
}  // namespace stream

/// mt19937_64 with bit-portable bounded/uniform/normal draws. The standard
/// distributions are implementation-defined, so they are not used here.
class Rng {
 public:
  explicit Rng(std::uint64_t stream_key) : engine_(stream_key) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Unbiased integer in [0, bound) (Lemire multiply-reject).
  std::uint64_t uniform_index(std::uint64_t bound) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform in (0, 1].
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second draw of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  /// Rademacher sign in {-1.0, +1.0}.
  double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  /// Uniform permutation of {0,...,n-1} (Fisher-Yates).
  std::vector<std::uint32_t> permutation(std::uint32_t n) {
    std::vector<std::uint32_t> p(n);
    for (std::uint32_t i = 0; i < n; ++i) p[i] = i;
    for (std::uint32_t i = n; i > 1; --i) {
      const auto j = static_cast<std::uint32_t>(uniform_index(i));
      std::swap(p[i - 1], p[j]);
    }
    return p;
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0;
  bool has_cached_ = false;
};

}  // namespace si
