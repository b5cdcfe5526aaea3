#include "si/simulate.hpp"

#include <cmath>

#include "si/rng.hpp"

namespace si {

namespace {

SampleGenerator make_generator(std::string name,
                               std::function<void(Rng&, double&, double&)> pair) {
  SampleGenerator g;
  g.name = std::move(name);
  g.draw = [pair = std::move(pair)](Index n, std::uint64_t seed,
                                    std::uint64_t replicate) -> PairedSample {
    Rng rng(substream_seed(seed, stream::generator, replicate));
    Matrix x(n, 1), y(n, 1);
    for (Index i = 0; i < n; ++i) {
      double xv = 0, yv = 0;
      pair(rng, xv, yv);
      x(i, 0) = xv;
      y(i, 0) = yv;
    }
    return PairedSample(std::move(x), std::move(y));
  };
  return g;
}

}  // namespace

SampleGenerator bivariate_normal_sampler(double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) throw ValidationError("rho must lie in [-1,1]");
  const double comp = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  return make_generator("normal-rho=" + std::to_string(rho),
                        [rho, comp](Rng& rng, double& x, double& y) {
                          const double z1 = rng.normal();
                          const double z2 = rng.normal();
                          x = z1;
                          y = rho * z1 + comp * z2;
                        });
}

SampleGenerator independent_normal_sampler() { return bivariate_normal_sampler(0.0); }

SampleGenerator independent_rademacher_sampler() {
  return make_generator("rademacher-independent", [](Rng& rng, double& x, double& y) {
    x = rng.sign();
    y = rng.sign();
  });
}

SampleGenerator rademacher_pair_sampler(bool negate) {
  return make_generator(negate ? "rademacher-y=-x" : "rademacher-y=x",
                        [negate](Rng& rng, double& x, double& y) {
                          x = rng.sign();
                          y = negate ? -x : x;
                        });
}

SampleGenerator quadratic_sampler() {
  return make_generator("y=x^2-1", [](Rng& rng, double& x, double& y) {
    x = rng.normal();
    y = x * x - 1.0;
  });
}

PairedSample draw_sample(const SampleGenerator& generator, Index n, std::uint64_t seed,
                         std::uint64_t replicate) {
  return generator.draw(n, seed, replicate);
}

Matrix random_orthonormal(Index p, std::uint64_t seed) {
  Rng rng(substream_seed(seed, stream::generator, 0xC0));
  Eigen::MatrixXd g(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < p; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);  // fix the sign convention
  }
  return q;
}

}  // namespace si
