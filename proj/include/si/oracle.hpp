#pragma once

#include <string>
#include <utility>
#include <vector>

#include "si/types.hpp"

namespace si {

// Independent verification of the estimators: direct quadrature of the
// defining characteristic-function integral for small discrete 1-D laws,
// exact population moments by atom enumeration, and the closed forms for
// bivariate normal and Cauchy.

struct DiscreteAtom {
  double x = 0;
  double y = 0;
  double prob = 0;
};

/// Finite joint law on R^2; probabilities positive and summing to 1 (1e-12).
class DiscreteJointLaw {
 public:
  explicit DiscreteJointLaw(std::vector<DiscreteAtom> atoms);

  const std::vector<DiscreteAtom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  /// Schema: {"atoms": [[x, y, prob], ...]}
  static DiscreteJointLaw from_json_text(const std::string& text);
  static DiscreteJointLaw from_json_file(const std::string& path);

 private:
  std::vector<DiscreteAtom> atoms_;
};

struct Atom1D {
  double value = 0;
  double prob = 0;
};

class DiscreteLaw1D {
 public:
  explicit DiscreteLaw1D(std::vector<Atom1D> atoms);
  const std::vector<Atom1D>& atoms() const { return atoms_; }

 private:
  std::vector<Atom1D> atoms_;
};

DiscreteLaw1D x_margin(const DiscreteJointLaw& law);
DiscreteLaw1D y_margin(const DiscreteJointLaw& law);

struct QuadratureSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  double t_max = 200.0;
  int subdivision_limit = 20000;
};

/// 2/c(1,alpha) * int_0^inf |phi_{X+Y}(t) - phi_X(t) phi_Y(t)|^2 t^{-1-alpha} dt
/// by adaptive Gauss-Kronrod on (0, t_max] plus the analytic tail of the
/// integrand's trigonometric-polynomial expansion beyond t_max. Throws
/// NumericError when the requested tolerance cannot be certified within the
/// subdivision limit. error_bound_out, when given, receives the certified
/// bound on |returned - exact|.
double quadrature_sicov_discrete(const DiscreteJointLaw& law, const AlphaParam& alpha,
                                 const QuadratureSpec& spec,
                                 double* error_bound_out = nullptr);

/// Both sides of the moment identity
///   (1/c(1,alpha)) int_R (1 - Re phi_X(t)) |t|^{-1-alpha} dt = E|X|^alpha:
/// first the quadrature value, second the exact atom moment.
std::pair<double, double> lemma21_check(const DiscreteLaw1D& law, const AlphaParam& alpha,
                                        const QuadratureSpec& spec);

/// Exact population moment terms of a discrete joint law by enumeration over
/// atom tuples (m^4 combinations).
struct PopulationTerms {
  double j1 = 0, j2 = 0, j3 = 0;
  double k1 = 0, k2 = 0, k3 = 0;

  double sicov() const { return 2.0 * j1 - j2 - j3; }
  double denominator() const { return k1 + k2 - k3; }
};

PopulationTerms population_terms(const DiscreteJointLaw& law, const AlphaParam& alpha);

/// Population sicor with the definition's zero branch for constant margins.
double population_sicor(const DiscreteJointLaw& law, const AlphaParam& alpha);

/// Closed forms for the bivariate standard normal with correlation rho:
///   sicov   = 2 sqrt(2/pi) (sqrt(4+2rho) - 1 - sqrt(1+rho))
///   sicor   = (sqrt(4+2rho) - sqrt(1+rho) - 1) / (sqrt(2) - 1)
///   ratio_r = (sqrt(4+2rho) - sqrt(1+rho) - 1) / (sqrt(6) - sqrt(2) - 1),
/// the normalization that fails to stay below 1 (11.74 at rho = -1).
struct NormalClosedForm {
  double sicov = 0;
  double sicor = 0;
  double ratio_r = 0;
};

NormalClosedForm normal_closed_form(double rho);

/// Standard bivariate Cauchy sub-independence correlation, 0 < alpha < 1:
///   (-4^a + 2(2+sqrt2)^a - (2 sqrt2)^a) / (4 (2^{a-1} - 4^{a-1})).
double cauchy_closed_form(double alpha);

}  // namespace si
