// Command-line front end: estimate | test | simulate | oracle.
//
// Exit codes: 0 success, 1 rejection when --exit-on-reject is set,
// 2 invalid input or flags, 3 numeric failure.

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "si/csv.hpp"
#include "si/estimators.hpp"
#include "si/inference.hpp"
#include "si/oracle.hpp"
#include "si/rng.hpp"
#include "si/simulate.hpp"

namespace {

using nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw si::ValidationError("cannot write '" + out_path + "'");
  out << text;
}

// One header row and one value row; strings are quoted.
std::string json_to_csv(const ordered_json& doc) {
  std::string header, row;
  bool first = true;
  const auto add = [&](const std::string& key, const ordered_json& value) {
    if (!first) {
      header += ',';
      row += ',';
    }
    first = false;
    header += key;
    if (value.is_null()) {
      // empty field
    } else if (value.is_string()) {
      row += '"' + value.get<std::string>() + '"';
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ';';
        joined += item.is_string() ? item.get<std::string>() : item.dump();
      }
      row += '"' + joined + '"';
    } else {
      row += value.dump();
    }
  };
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object()) {
      for (const auto& [sub, subvalue] : value.items()) add(key + "_" + sub, subvalue);
    } else {
      add(key, value);
    }
  }
  return header + "\n" + row + "\n";
}

void emit(const ordered_json& doc, const std::string& format, const std::string& out_path) {
  if (format == "csv") {
    write_output(json_to_csv(doc), out_path);
  } else {
    write_output(doc.dump(2) + "\n", out_path);
  }
}

si::EstimatorMode parse_mode(const std::string& name) {
  if (name == "auto") return si::EstimatorMode::auto_select;
  if (name == "u") return si::EstimatorMode::u_complete;
  if (name == "u-incomplete") return si::EstimatorMode::u_incomplete;
  if (name == "v-fast") return si::EstimatorMode::v_fast;
  throw si::ValidationError("unknown mode '" + name + "'");
}

struct CommonOpts {
  std::string input;
  std::optional<si::Index> declared_p;
  double alpha = 1.0;
  std::string mode = "auto";
  std::uint64_t budget = 200000;
  std::uint64_t seed = si::EstimatorConfig::kDefaultSeed;
  int threads = 1;
  std::string format = "json";
  std::string out;

  si::EstimatorConfig config() const {
    si::EstimatorConfig c;
    c.mode = parse_mode(mode);
    c.tuple_budget = budget;
    c.seed = seed;
    c.threads = threads;
    return c;
  }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_input = true) {
  if (with_input) {
    cmd->add_option("--input", o.input, "input CSV (columns x1..xp,y1..yp)")->required();
    cmd->add_option("--p", o.declared_p, "declared margin dimension (checked against the header)");
  }
  cmd->add_option("--alpha", o.alpha, "exponent in (0,2)")->capture_default_str();
  cmd->add_option("--mode", o.mode, "estimator mode: auto|u|u-incomplete|v-fast")
      ->check(CLI::IsMember({"auto", "u", "u-incomplete", "v-fast"}))
      ->capture_default_str();
  cmd->add_option("--budget", o.budget, "tuples per term in u-incomplete mode")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "rng seed")->capture_default_str();
  cmd->add_option("--threads", o.threads, "worker cap (results identical at any count)")
      ->capture_default_str();
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--out", o.out, "write output to a file instead of stdout");
}

int run_estimate(const CommonOpts& opts, bool clamp) {
  const si::PairedSample sample = si::load_csv(opts.input, opts.declared_p);
  const si::AlphaParam alpha(opts.alpha);
  si::EstimatorConfig config = opts.config();
  config.clamp_sicor = clamp;

  const auto cov = si::sicov_hat(sample, alpha, config);
  const auto cor = si::sicor_hat(sample, alpha, config);
  const auto [dcov, dcor] = si::dcov_dcor_baseline(sample);

  std::vector<std::string> warnings = cov.estimate.warnings;
  warnings.insert(warnings.end(), cor.estimate.warnings.begin(), cor.estimate.warnings.end());

  ordered_json doc;
  doc["sicov"] = cov.estimate.value;
  doc["sicor"] = cor.estimate.value;
  doc["dcov"] = dcov.value;
  doc["dcor"] = dcor.value;
  if (sample.p() == 1) {
    try {
      doc["pearson"] = si::pearson_baseline(sample).value;
    } catch (const si::NumericError& e) {
      doc["pearson"] = nullptr;
      warnings.emplace_back(e.what());
    }
  }
  doc["alpha"] = opts.alpha;
  doc["mode"] = si::mode_name(si::resolve_mode(config, sample.n()));
  doc["n"] = sample.n();
  doc["p"] = sample.p();
  doc["seed"] = opts.seed;
  doc["rng"] = si::kRngAlgorithm;
  doc["warnings"] = warnings;
  emit(doc, opts.format, opts.out);
  return 0;
}

int run_test(const CommonOpts& opts, int permutations, double level, bool want_ci,
             std::uint64_t ci_budget, bool exit_on_reject) {
  const si::PairedSample sample = si::load_csv(opts.input, opts.declared_p);
  const si::AlphaParam alpha(opts.alpha);
  const si::EstimatorConfig config = opts.config();

  const si::TestResult result =
      si::permutation_test(sample, alpha, permutations, level, config);

  ordered_json doc;
  doc["statistic"] = result.statistic;
  doc["p_value"] = result.p_value;
  doc["reject"] = result.reject;
  doc["permutations"] = result.permutations;
  doc["level"] = result.level;
  if (want_ci) {
    const auto ci = si::asymptotic_ci(sample, alpha, 1.0 - level, ci_budget, config);
    doc["ci"] = ordered_json{{"lower", ci.lower},
                             {"upper", ci.upper},
                             {"level", ci.level},
                             {"variance_hat", ci.variance_hat},
                             {"warnings", ci.warnings}};
  }
  doc["seed"] = opts.seed;
  doc["rng"] = si::kRngAlgorithm;
  emit(doc, opts.format, opts.out);
  return exit_on_reject && result.reject ? 1 : 0;
}

int run_simulate(const std::string& scenario, const CommonOpts& opts, si::Index n,
                 int replicates, int runs, int permutations, double level,
                 std::vector<double> rhos, const std::string& generator_name, double rho) {
  std::string csv;
  const auto add_row = [&csv](std::initializer_list<std::string> fields) {
    bool first = true;
    for (const auto& f : fields) {
      if (!first) csv += ',';
      first = false;
      csv += f;
    }
    csv += '\n';
  };

  if (scenario == "normal-grid") {
    if (rhos.empty()) rhos = {-1.0, -0.5, 0.0, 0.5, 1.0};
    si::EstimatorConfig config = opts.config();
    add_row({"rho", "n", "mode", "seed", "sicov_closed", "sicor_closed", "sicov_hat",
             "sicor_hat"});
    for (const double r : rhos) {
      const auto closed = si::normal_closed_form(r);
      const si::PairedSample sample =
          si::draw_sample(si::bivariate_normal_sampler(r), n, opts.seed);
      const si::AlphaParam alpha(opts.alpha);
      const auto cov = si::sicov_hat(sample, alpha, config);
      const auto cor = si::sicor_hat(sample, alpha, config);
      add_row({fmt_double(r), std::to_string(n),
               si::mode_name(si::resolve_mode(config, n)), std::to_string(opts.seed),
               fmt_double(closed.sicov), fmt_double(closed.sicor),
               fmt_double(cov.estimate.value), fmt_double(cor.estimate.value)});
    }
  } else if (scenario == "cauchy-grid") {
    add_row({"alpha", "sicor_closed"});
    for (int i = 1; i <= 19; ++i) {
      const double a = static_cast<double>(i) / 20.0;
      add_row({fmt_double(a), fmt_double(si::cauchy_closed_form(a))});
    }
  } else if (scenario == "null-sim") {
    const si::SampleGenerator gen = generator_name == "rademacher"
                                        ? si::independent_rademacher_sampler()
                                        : si::bivariate_normal_sampler(rho);
    si::EstimatorConfig config = opts.config();
    if (config.mode == si::EstimatorMode::auto_select) config.mode = si::EstimatorMode::v_fast;
    const auto values = si::null_distribution_sim(gen, n, replicates,
                                                  si::AlphaParam(opts.alpha), opts.seed, config);
    add_row({"replicate", "statistic"});
    for (std::size_t r = 0; r < values.size(); ++r) {
      add_row({std::to_string(r), fmt_double(values[r])});
    }
  } else if (scenario == "power-x2") {
    si::EstimatorConfig config = opts.config();
    if (config.mode == si::EstimatorMode::auto_select) config.mode = si::EstimatorMode::v_fast;
    const auto gen = si::quadratic_sampler();
    int rejections = 0;
    for (int run = 0; run < runs; ++run) {
      const si::PairedSample sample =
          si::draw_sample(gen, n, opts.seed, static_cast<std::uint64_t>(run));
      si::EstimatorConfig run_config = config;
      run_config.seed = si::substream_seed(opts.seed, 0xF0, static_cast<std::uint64_t>(run));
      const auto result = si::permutation_test(sample, si::AlphaParam(opts.alpha),
                                               permutations, level, run_config);
      if (result.reject) ++rejections;
    }
    add_row({"n", "runs", "permutations", "level", "alpha", "seed", "rejection_rate"});
    add_row({std::to_string(n), std::to_string(runs), std::to_string(permutations),
             fmt_double(level), fmt_double(opts.alpha), std::to_string(opts.seed),
             fmt_double(static_cast<double>(rejections) / runs)});
  } else {
    throw si::ValidationError("unknown scenario '" + scenario + "'");
  }

  write_output(csv, opts.out);
  return 0;
}

int run_oracle(const CommonOpts& opts, const std::string& fixture,
               const std::string& lemma_margin, std::optional<double> normal_rho,
               std::optional<double> cauchy_alpha, double t_max, double rel_tol) {
  ordered_json doc;
  if (!fixture.empty()) {
    const auto law = si::DiscreteJointLaw::from_json_file(fixture);
    const si::AlphaParam alpha(opts.alpha);
    si::QuadratureSpec spec;
    spec.t_max = t_max;
    spec.rel_tol = rel_tol;

    const auto pop = si::population_terms(law, alpha);
    double err = 0;
    const double quad = si::quadrature_sicov_discrete(law, alpha, spec, &err);
    doc["alpha"] = opts.alpha;
    doc["population"] = ordered_json{{"j1", pop.j1}, {"j2", pop.j2}, {"j3", pop.j3},
                                     {"k1", pop.k1}, {"k2", pop.k2}, {"k3", pop.k3},
                                     {"sicov", pop.sicov()},
                                     {"sicor", si::population_sicor(law, alpha)}};
    doc["quadrature"] = ordered_json{{"sicov", quad}, {"error_bound", err}};
    if (!lemma_margin.empty()) {
      const auto margin = lemma_margin == "y" ? si::y_margin(law) : si::x_margin(law);
      const auto [lhs, rhs] = si::lemma21_check(margin, alpha, spec);
      doc["lemma21"] = ordered_json{
          {"margin", lemma_margin}, {"quadrature", lhs}, {"moment", rhs}};
    }
  } else if (normal_rho) {
    const auto cf = si::normal_closed_form(*normal_rho);
    doc["rho"] = *normal_rho;
    doc["sicov"] = cf.sicov;
    doc["sicor"] = cf.sicor;
    doc["ratio_r"] = cf.ratio_r;
  } else if (cauchy_alpha) {
    doc["alpha"] = *cauchy_alpha;
    doc["sicor"] = si::cauchy_closed_form(*cauchy_alpha);
  } else {
    throw si::ValidationError(
        "oracle needs one of --fixture, --normal-rho, --cauchy-alpha");
  }
  emit(doc, opts.format, opts.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sub-independence covariance/correlation estimation and testing"};
  app.require_subcommand(1);

  // estimate
  CommonOpts est_opts;
  bool clamp = false;
  auto* estimate = app.add_subcommand("estimate", "point estimates on a CSV sample");
  add_common(estimate, est_opts);
  estimate->add_flag("--clamp-sicor", clamp, "clamp sicor into [0,1] (warned either way)");

  // test
  CommonOpts test_opts;
  int permutations = 999;
  double level = 0.05;
  bool want_ci = false;
  std::uint64_t ci_budget = 128;
  bool exit_on_reject = false;
  auto* test = app.add_subcommand("test", "permutation test of sub-independence");
  add_common(test, test_opts);
  test->add_option("--permutations", permutations, "permutation replicates (>= 19)")
      ->capture_default_str();
  test->add_option("--level", level, "test level in (0,1)")->capture_default_str();
  test->add_flag("--ci", want_ci, "also report the asymptotic interval at 1 - level");
  test->add_option("--ci-budget", ci_budget, "kernel triples per row for the interval")
      ->capture_default_str();
  test->add_flag("--exit-on-reject", exit_on_reject, "exit 1 when the test rejects");

  // simulate
  CommonOpts sim_opts;
  std::string scenario;
  si::Index sim_n = 200;
  int replicates = 1000;
  int runs = 200;
  int sim_permutations = 199;
  double sim_level = 0.05;
  std::vector<double> rhos;
  std::string generator_name = "normal";
  double rho = 0.0;
  auto* simulate = app.add_subcommand("simulate", "closed-form vs Monte Carlo tables (CSV)");
  add_common(simulate, sim_opts, /*with_input=*/false);
  simulate->add_option("--scenario", scenario, "normal-grid|cauchy-grid|null-sim|power-x2")
      ->required();
  simulate->add_option("--n", sim_n, "sample size per draw")->capture_default_str();
  simulate->add_option("--replicates", replicates, "null-sim draws")->capture_default_str();
  simulate->add_option("--runs", runs, "power-x2 test repetitions")->capture_default_str();
  simulate->add_option("--permutations", sim_permutations, "power-x2 permutations")
      ->capture_default_str();
  simulate->add_option("--level", sim_level, "power-x2 level")->capture_default_str();
  simulate->add_option("--rhos", rhos, "normal-grid correlation grid");
  simulate->add_option("--generator", generator_name, "null-sim margins: normal|rademacher")
      ->check(CLI::IsMember({"normal", "rademacher"}))
      ->capture_default_str();
  simulate->add_option("--rho", rho, "null-sim normal correlation")->capture_default_str();

  // oracle
  CommonOpts oracle_opts;
  std::string fixture;
  std::string lemma_margin;
  std::optional<double> normal_rho;
  std::optional<double> cauchy_alpha;
  double t_max = 200.0;
  double rel_tol = 1e-8;
  auto* oracle = app.add_subcommand("oracle", "closed forms and quadrature verification");
  add_common(oracle, oracle_opts, /*with_input=*/false);
  oracle->add_option("--fixture", fixture, "joint law JSON: {\"atoms\": [[x,y,prob],...]}");
  oracle->add_option("--lemma", lemma_margin, "also run the moment identity on a margin")
      ->check(CLI::IsMember({"x", "y"}));
  oracle->add_option("--normal-rho", normal_rho, "bivariate normal closed forms");
  oracle->add_option("--cauchy-alpha", cauchy_alpha, "bivariate Cauchy closed form");
  oracle->add_option("--t-max", t_max, "quadrature truncation")->capture_default_str();
  oracle->add_option("--rel-tol", rel_tol, "quadrature relative tolerance")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (estimate->parsed()) return run_estimate(est_opts, clamp);
    if (test->parsed()) {
      return run_test(test_opts, permutations, level, want_ci, ci_budget, exit_on_reject);
    }
    if (simulate->parsed()) {
      return run_simulate(scenario, sim_opts, sim_n, replicates, runs, sim_permutations,
                          sim_level, rhos, generator_name, rho);
    }
    if (oracle->parsed()) {
      return run_oracle(oracle_opts, fixture, lemma_margin, normal_rho, cauchy_alpha,
                        t_max, rel_tol);
    }
  } catch (const si::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const si::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
