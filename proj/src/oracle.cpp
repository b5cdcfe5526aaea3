#include "si/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "si/kernels.hpp"

namespace si {

// --- discrete laws --------------------------------------------------------

DiscreteJointLaw::DiscreteJointLaw(std::vector<DiscreteAtom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ValidationError("discrete law needs at least one atom");
  double total = 0;
  for (const auto& a : atoms_) {
    if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(a.prob)) {
      throw ValidationError("discrete law atom has a non-finite entry");
    }
    if (!(a.prob > 0)) throw ValidationError("discrete law probabilities must be positive");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "discrete law probabilities sum to " << total << ", expected 1";
    throw ValidationError(msg.str());
  }
}

DiscreteJointLaw DiscreteJointLaw::from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("fixture: invalid JSON: ") + e.what());
  }
  if (!doc.contains("atoms") || !doc["atoms"].is_array()) {
    throw ValidationError("fixture: expected {\"atoms\": [[x, y, prob], ...]}");
  }
  std::vector<DiscreteAtom> atoms;
  for (const auto& row : doc["atoms"]) {
    if (!row.is_array() || row.size() != 3) {
      throw ValidationError("fixture: each atom must be [x, y, prob]");
    }
    atoms.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
  }
  return DiscreteJointLaw(std::move(atoms));
}

DiscreteJointLaw DiscreteJointLaw::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("fixture: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

DiscreteLaw1D::DiscreteLaw1D(std::vector<Atom1D> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ValidationError("discrete law needs at least one atom");
  double total = 0;
  for (const auto& a : atoms_) {
    if (!std::isfinite(a.value) || !std::isfinite(a.prob)) {
      throw ValidationError("discrete law atom has a non-finite entry");
    }
    if (!(a.prob > 0)) throw ValidationError("discrete law probabilities must be positive");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("discrete law probabilities must sum to 1");
  }
}

namespace {

std::vector<Atom1D> collect_margin(const DiscreteJointLaw& law, bool use_x) {
  std::vector<Atom1D> atoms;
  for (const auto& a : law.atoms()) atoms.push_back({use_x ? a.x : a.y, a.prob});
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom1D& l, const Atom1D& r) { return l.value < r.value; });
  std::vector<Atom1D> merged;
  for (const auto& a : atoms) {
    if (!merged.empty() && merged.back().value == a.value) {
      merged.back().prob += a.prob;
    } else {
      merged.push_back(a);
    }
  }
  return merged;
}

}  // namespace

DiscreteLaw1D x_margin(const DiscreteJointLaw& law) {
  return DiscreteLaw1D(collect_margin(law, true));
}

DiscreteLaw1D y_margin(const DiscreteJointLaw& law) {
  return DiscreteLaw1D(collect_margin(law, false));
}

// --- quadrature machinery ---------------------------------------------------
//
// For a finite law every characteristic function involved is a trigonometric
// polynomial, so the integrand on (0, t_max] is evaluated exactly (no
// sampling), and the tail beyond t_max has an analytic leading part: the
// polynomial's mean value integrates the weight exactly and each oscillatory
// component is integrated by parts twice, leaving a certified remainder of
// order t_max^{-alpha-3}.

namespace {

// f(t) = sum_m weight_m e^{i freq_m t}, real weights, unique frequencies.
struct ExpSeries {
  std::vector<double> freq;
  std::vector<double> weight;
};

ExpSeries collect_terms(std::vector<std::pair<double, double>> terms) {
  std::sort(terms.begin(), terms.end());
  ExpSeries out;
  for (const auto& [f, w] : terms) {
    if (!out.freq.empty() && out.freq.back() == f) {
      out.weight.back() += w;
    } else {
      out.freq.push_back(f);
      out.weight.push_back(w);
    }
  }
  // drop numerically cancelled terms (e.g. product laws)
  ExpSeries pruned;
  for (std::size_t m = 0; m < out.freq.size(); ++m) {
    if (out.weight[m] != 0.0) {
      pruned.freq.push_back(out.freq[m]);
      pruned.weight.push_back(out.weight[m]);
    }
  }
  return pruned;
}

// psi(t) = phi_{X+Y}(t) - phi_X(t) phi_Y(t) as an exponential series.
ExpSeries psi_series(const DiscreteJointLaw& law) {
  std::vector<std::pair<double, double>> terms;
  for (const auto& a : law.atoms()) terms.emplace_back(a.x + a.y, a.prob);
  const auto mx = collect_margin(law, true);
  const auto my = collect_margin(law, false);
  for (const auto& ax : mx) {
    for (const auto& ay : my) {
      terms.emplace_back(ax.value + ay.value, -ax.prob * ay.prob);
    }
  }
  return collect_terms(std::move(terms));
}

// g(t) = constant + sum_m coef_m cos(freq_m t) with freq_m > 0.
struct CosineSeries {
  double constant = 0;
  std::vector<double> freq;
  std::vector<double> coef;

  double max_freq() const {
    double m = 0;
    for (const double f : freq) m = std::max(m, f);
    return m;
  }
};

// |psi|^2 expanded over frequency pairs.
CosineSeries modulus_squared_series(const ExpSeries& s) {
  CosineSeries out;
  const std::size_t m = s.freq.size();
  for (std::size_t a = 0; a < m; ++a) out.constant += s.weight[a] * s.weight[a];
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      out.freq.push_back(std::abs(s.freq[a] - s.freq[b]));
      out.coef.push_back(2.0 * s.weight[a] * s.weight[b]);
    }
  }
  return out;
}

// 1 - Re phi_X(t) for a 1-D law, as a cosine series.
CosineSeries one_minus_cf_series(const DiscreteLaw1D& law) {
  CosineSeries out;
  out.constant = 1.0;
  std::vector<std::pair<double, double>> terms;
  for (const auto& a : law.atoms()) {
    if (a.value == 0.0) {
      out.constant -= a.prob;  // cos(0) contributes a constant
    } else {
      terms.emplace_back(std::abs(a.value), -a.prob);
    }
  }
  const auto collected = collect_terms(std::move(terms));
  out.freq = collected.freq;
  out.coef = collected.weight;
  return out;
}

struct ValueWithError {
  double value = 0;
  double error = 0;
};

// c * int_T^inf cos(wt) t^{-s} dt by repeated integration by parts:
//   I(s) = -sin(wT) T^{-s}/w + s cos(wT) T^{-s-1}/w^2 - (s(s+1)/w^2) I(s+2),
// recursed `depth` times; each level shrinks the remainder by (wT)^-2 T^-...
// The stopping bound is the crude |c| int_T^inf t^{-s} = |c| T^{1-s}/(s-1).
ValueWithError ibp_cosine_tail(double c, double w, double T, double s, int depth) {
  if (depth == 0 || w * T < 2.0) {
    return {0.0, std::abs(c) * std::pow(T, 1.0 - s) / (s - 1.0)};
  }
  const double ts = std::pow(T, -s);
  const auto rest = ibp_cosine_tail(c * s * (s + 1.0) / (w * w), w, T, s + 2.0, depth - 1);
  ValueWithError out;
  out.value = c * (-std::sin(w * T) * ts / w + s * std::cos(w * T) * ts / (T * w * w)) -
              rest.value;
  out.error = rest.error;
  return out;
}

// int_T^inf g(t) t^{-1-alpha} dt: the constant integrates exactly, each
// oscillatory component via ibp_cosine_tail.
ValueWithError cosine_series_tail(const CosineSeries& g, double T, double alpha) {
  const double s = 1.0 + alpha;
  ValueWithError out;
  out.value = g.constant * std::pow(T, -alpha) / alpha;
  for (std::size_t m = 0; m < g.freq.size(); ++m) {
    const auto piece = ibp_cosine_tail(g.coef[m], g.freq[m], T, s, 3);
    out.value += piece.value;
    out.error += piece.error;
  }
  return out;
}

// 15-point Kronrod / 7-point Gauss pair (QUADPACK dqk15 abscissae).
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <typename F>
ValueWithError gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k15 = kWgk[7] * fc;
  double g7 = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double v = f(c - dx) + f(c + dx);
    k15 += kWgk[j] * v;
    if (j % 2 == 1) g7 += kWg[j / 2] * v;
  }
  k15 *= h;
  g7 *= h;
  return {k15, std::abs(k15 - g7)};
}

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

struct AdaptiveResult {
  double value = 0;
  double error = 0;
  int panels = 0;
};

// Adaptive bisection, worst panel first. The initial partition resolves the
// fastest oscillation so the per-panel Kronrod estimates are trustworthy.
template <typename F>
AdaptiveResult adaptive_gk(const F& f, double a, double b, double max_freq,
                           double abs_tol, double rel_tol, int panel_limit) {
  AdaptiveResult res;
  if (!(b > a)) return res;

  double h = b - a;
  if (max_freq > 0) h = std::min(h, 2.0 * M_PI / max_freq);
  int initial = static_cast<int>(std::ceil((b - a) / h));
  initial = std::min(initial, std::max(1, panel_limit / 2));

  std::priority_queue<Panel> queue;
  double total = 0, err = 0;
  int count = 0;
  for (int i = 0; i < initial; ++i) {
    const double lo = a + (b - a) * i / initial;
    const double hi = a + (b - a) * (i + 1) / initial;
    const auto r = gk15(f, lo, hi);
    queue.push({lo, hi, r.value, r.error});
    total += r.value;
    err += r.error;
    ++count;
  }

  while (err > abs_tol + rel_tol * std::abs(total) && count < panel_limit) {
    const Panel worst = queue.top();
    if (worst.b - worst.a < 1e-14 * (b - a)) break;  // cannot refine further
    queue.pop();
    total -= worst.value;
    err -= worst.error;
    const double mid = 0.5 * (worst.a + worst.b);
    for (const auto& [lo, hi] : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
      const auto r = gk15(f, lo, hi);
      queue.push({lo, hi, r.value, r.error});
      total += r.value;
      err += r.error;
    }
    ++count;
  }

  res.value = total;
  res.error = err;
  res.panels = count;
  return res;
}

void require_tolerance(double error, double value, const QuadratureSpec& spec,
                       const char* what) {
  if (error > spec.abs_tol + spec.rel_tol * std::abs(value)) {
    std::ostringstream msg;
    msg << what << ": certified error " << error << " exceeds tolerance for value " << value
        << " within " << spec.subdivision_limit
        << " panels; increase t_max or the subdivision limit";
    throw NumericError(msg.str());
  }
}

void validate_spec(const QuadratureSpec& spec) {
  if (!(spec.rel_tol > 0) || !(spec.abs_tol > 0)) {
    throw ValidationError("quadrature tolerances must be positive");
  }
  if (!(spec.t_max > 0)) throw ValidationError("quadrature t_max must be positive");
  if (spec.subdivision_limit < 1) throw ValidationError("subdivision limit must be >= 1");
}

}  // namespace

double quadrature_sicov_discrete(const DiscreteJointLaw& law, const AlphaParam& alpha,
                                 const QuadratureSpec& spec, double* error_bound_out) {
  validate_spec(spec);
  const double a = alpha.value();
  const ExpSeries psi = psi_series(law);
  if (psi.freq.empty()) {
    // phi_{X+Y} = phi_X phi_Y identically (e.g. a product law).
    if (error_bound_out) *error_bound_out = 0;
    return 0;
  }

  // |psi(t)|^2 t^{-1-alpha}; the numerator is O(t^4) at the origin, so the
  // integrand extends continuously by 0.
  const auto integrand = [&](double t) -> double {
    if (t <= 0) return 0;
    double cs = 0, sn = 0;
    for (std::size_t m = 0; m < psi.freq.size(); ++m) {
      cs += psi.weight[m] * std::cos(psi.freq[m] * t);
      sn += psi.weight[m] * std::sin(psi.freq[m] * t);
    }
    return (cs * cs + sn * sn) * std::pow(t, -1.0 - a);
  };

  const CosineSeries mod2 = modulus_squared_series(psi);
  const auto quad = adaptive_gk(integrand, 0.0, spec.t_max, mod2.max_freq(),
                                0.25 * spec.abs_tol, 0.25 * spec.rel_tol,
                                spec.subdivision_limit);
  const auto tail = cosine_series_tail(mod2, spec.t_max, a);

  const double scale = 2.0 / c_const(1, a).value;
  const double value = scale * (quad.value + tail.value);
  const double error = scale * (quad.error + tail.error);
  require_tolerance(error, value, spec, "quadrature_sicov_discrete");
  if (error_bound_out) *error_bound_out = error;
  return value;
}

std::pair<double, double> lemma21_check(const DiscreteLaw1D& law, const AlphaParam& alpha,
                                        const QuadratureSpec& spec) {
  validate_spec(spec);
  const double a = alpha.value();

  double moment = 0;  // E|X|^alpha, exact
  double x_max = 0;
  for (const auto& atom : law.atoms()) {
    const double r = std::abs(atom.value);
    if (r > 0) moment += atom.prob * (a == 1.0 ? r : std::pow(r, a));
    x_max = std::max(x_max, r);
  }
  if (x_max == 0.0) return {0.0, 0.0};  // point mass at 0: both sides vanish

  // (1/c) int_R (1 - Re phi)(t) |t|^{-1-a} dt = (2/c) int_0^inf. The integrand
  // behaves like t^{1-a} at 0, integrable but singular for a > 1, so [0, eps]
  // is summed as the alternating moment series
  //   sum_k (-1)^{k+1} M_{2k} eps^{2k-a} / ((2k)! (2k-a)),  M_{2k} = E X^{2k}.
  const double eps = std::min(0.5 / x_max, 0.5 * spec.t_max);
  double series = 0, series_err = 0;
  {
    // pw_i tracks (x_i eps)^{2k}, bounded by 0.25^k, so nothing overflows.
    std::vector<double> pw(law.atoms().size(), 1.0);
    const double eps_neg_a = std::pow(eps, -a);
    double inv_factorial = 1.0;  // 1/(2k)!
    double sign = 1.0;
    for (int k = 1; k <= 60; ++k) {
      inv_factorial /= (2.0 * k) * (2.0 * k - 1.0);
      double m2k_eps = 0;  // E (X eps)^{2k}
      for (std::size_t i = 0; i < pw.size(); ++i) {
        const double xe = law.atoms()[i].value * eps;
        pw[i] *= xe * xe;
        m2k_eps += law.atoms()[i].prob * pw[i];
      }
      const double term = sign * m2k_eps * inv_factorial * eps_neg_a / (2.0 * k - a);
      series += term;
      sign = -sign;
      series_err = std::abs(term);  // alternating with decreasing terms
      if (series_err < 1e-18 * std::max(1.0, std::abs(series))) break;
    }
  }

  const auto integrand = [&](double t) -> double {
    double f = 0;
    for (const auto& atom : law.atoms()) {
      const double s = std::sin(0.5 * atom.value * t);
      f += atom.prob * 2.0 * s * s;  // 1 - cos(vt), cancellation-free
    }
    return f * std::pow(t, -1.0 - a);
  };

  const CosineSeries series_cf = one_minus_cf_series(law);
  const auto quad = adaptive_gk(integrand, eps, spec.t_max, series_cf.max_freq(),
                                0.25 * spec.abs_tol, 0.25 * spec.rel_tol,
                                spec.subdivision_limit);
  const auto tail = cosine_series_tail(series_cf, spec.t_max, a);

  const double scale = 2.0 / c_const(1, a).value;
  const double value = scale * (series + quad.value + tail.value);
  const double error = scale * (series_err + quad.error + tail.error);
  require_tolerance(error, value, spec, "lemma21_check");
  return {value, moment};
}

// --- exact population moments ----------------------------------------------

namespace {

double pow_alpha(double v, double a) {
  const double r = std::abs(v);
  if (r == 0.0) return 0.0;
  return a == 1.0 ? r : std::pow(r, a);
}

}  // namespace

PopulationTerms population_terms(const DiscreteJointLaw& law, const AlphaParam& alpha) {
  const double a = alpha.value();
  const auto& atoms = law.atoms();
  const std::size_t m = atoms.size();

  PopulationTerms t;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double pij = atoms[i].prob * atoms[j].prob;
      t.j3 += pij * pow_alpha(atoms[i].x + atoms[i].y - atoms[j].x - atoms[j].y, a);
      t.k1 += pij * pow_alpha(atoms[i].x - atoms[j].x, a);
      t.k2 += pij * pow_alpha(atoms[i].y - atoms[j].y, a);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        const double p = atoms[i].prob * atoms[j].prob * atoms[k].prob;
        t.j1 += p * pow_alpha(atoms[i].x + atoms[i].y - atoms[j].x - atoms[k].y, a);
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t l = 0; l < m; ++l) {
          const double p = atoms[i].prob * atoms[j].prob * atoms[k].prob * atoms[l].prob;
          t.j2 += p * pow_alpha(atoms[i].x + atoms[j].y - atoms[k].x - atoms[l].y, a);
          t.k3 += p * pow_alpha(atoms[i].x - atoms[j].x + atoms[k].y - atoms[l].y, a);
        }
      }
    }
  }
  return t;
}

double population_sicor(const DiscreteJointLaw& law, const AlphaParam& alpha) {
  const auto margin_constant = [](const DiscreteLaw1D& m) { return m.atoms().size() == 1; };
  if (margin_constant(x_margin(law)) || margin_constant(y_margin(law))) return 0.0;
  const PopulationTerms t = population_terms(law, alpha);
  const double den = t.denominator();
  if (!(den > 0)) {
    throw NumericError("population sicor denominator is not positive");
  }
  return t.sicov() / den;
}

// --- closed forms ------------------------------------------------------------

NormalClosedForm normal_closed_form(double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw ValidationError("normal closed form needs rho in [-1,1]");
  }
  const double core = std::sqrt(4.0 + 2.0 * rho) - std::sqrt(1.0 + rho) - 1.0;
  NormalClosedForm out;
  out.sicov = 2.0 * std::sqrt(2.0 / M_PI) * core;
  out.sicor = core / (std::numbers::sqrt2 - 1.0);
  out.ratio_r = core / (std::sqrt(6.0) - std::numbers::sqrt2 - 1.0);
  return out;
}

double cauchy_closed_form(double alpha) {
  validate_alpha(alpha, AlphaContext::cauchy_margin);
  // -(4^a - 1) + 2((2+sqrt2)^a - 1) - ((2 sqrt2)^a - 1): the shifted form is
  // exact (the constants cancel) and keeps precision as alpha -> 0.
  const double num = -std::expm1(alpha * std::log(4.0)) +
                     2.0 * std::expm1(alpha * std::log(2.0 + std::numbers::sqrt2)) -
                     std::expm1(alpha * std::log(2.0 * std::numbers::sqrt2));
  const double den = 4.0 * (std::pow(2.0, alpha - 1.0) - std::pow(4.0, alpha - 1.0));
  return num / den;
}

}  // namespace si
