#pragma once

#include "si/inference.hpp"
#include "si/types.hpp"

namespace si {

// Named deterministic samplers (p = 1) used by the simulate subcommand and
// the verification suites.

/// (X, Y) bivariate standard normal with correlation rho.
SampleGenerator bivariate_normal_sampler(double rho);

/// Independent standard normal margins.
SampleGenerator independent_normal_sampler();

/// Independent Rademacher margins.
SampleGenerator independent_rademacher_sampler();

/// Rademacher X with Y = X (or Y = -X when negate).
SampleGenerator rademacher_pair_sampler(bool negate = false);

/// X standard normal, Y = X^2 - 1: uncorrelated but dependent.
SampleGenerator quadratic_sampler();

PairedSample draw_sample(const SampleGenerator& generator, Index n, std::uint64_t seed,
                         std::uint64_t replicate = 0);

/// Random p x p orthonormal matrix (QR of a Gaussian matrix, sign-fixed).
Matrix random_orthonormal(Index p, std::uint64_t seed);

}  // namespace si
