// cptq: experiment runner for the CPT portfolio library.
//
//   cptq <command> [--config FILE] [--out DIR] [--seed N] [--set key=value ...]
//
// Exit codes: 0 success (including a "not attainable" finding), 2 configuration
// error, 3 computation error.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "cptq/attainability.hpp"
#include "cptq/choquet.hpp"
#include "cptq/config.hpp"
#include "cptq/constructions.hpp"
#include "cptq/errors.hpp"
#include "cptq/market.hpp"
#include "cptq/optimizer.hpp"

namespace fs = std::filesystem;
using namespace cptq;

namespace {

struct Run {
  std::string command;
  Config config = Config::defaults();
  fs::path out_dir = ".";
};

std::string header(const Run& run, const std::string& lead) {
  std::string h = fmt::format("{}cptq {}\n{}command = {}\n", lead, kVersion, lead, run.command);
  return h + run.config.resolved(lead);
}

std::ofstream open_output(const Run& run, const std::string& name) {
  fs::create_directories(run.out_dir);
  const fs::path path = run.out_dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  return out;
}

nlohmann::json config_json(const Config& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : c.entries()) j[k] = v;
  return j;
}

int cmd_value(const Run& run) {
  const std::string& path = run.config.get("value.law");
  if (path.empty()) throw ConfigError("value: set value.law to a discrete law CSV (value,prob)");
  const Law law = load_discrete_law(path);
  const CptPreferences prefs = build_preferences(run.config);
  const PricingKernel k = build_kernel(run.config);
  const CptValue v = cpt_value(law, prefs);
  const ExtendedReal cost = budget(k, law);

  auto out = open_output(run, "value.csv");
  out << header(run, "# ") << "v_plus,v_minus,total,cost\n";
  out << fmt::format("{},{},{},{}\n", v.v_plus, v.v_minus.to_string(), v.total.to_string(), cost.to_string());
  std::cout << fmt::format("v_plus = {}\nv_minus = {}\ntotal = {}\ncost = {}\n", v.v_plus, v.v_minus.to_string(),
                           v.total.to_string(), cost.to_string());
  return 0;
}

int cmd_check(const Run& run) {
  const Config& c = run.config;
  const CptPreferences prefs = build_preferences(c);
  const PricingKernel k = build_kernel(c);
  const double delta = c.number("delta");

  const AssumptionReport kernel = check_assumptions(k);
  std::vector<ConditionVerdict> verdicts;
  verdicts.push_back(liminf_condition(prefs.w_minus, prefs.u_minus));
  verdicts.push_back(check_delta_threshold(prefs.u_minus, delta));

  // w- against the associated distortion w_delta, the hypothesis of the existence result
  {
    ConditionVerdict v;
    v.name = "w_minus_dominates_w_delta";
    if (!prefs.u_minus.saturation().is_pos_inf() || !(delta > 0.0)) {
      v.holds = Holds::inconclusive;
      v.rule = "w_delta needs an unbounded u- and delta > 0";
    } else {
      const DistortionFunction wd = associated_distortion(prefs.u_minus, delta);
      bool ok = true;
      for (int j = 1; j <= 1000; ++j) {
        const double p = j < 1000 ? j / 1000.0 : 1.0;
        const double gap = prefs.w_minus(p) - wd(p);
        if (prefs.w_minus(p) < wd(p) * (1.0 - 1e-12) - 1e-15) ok = false;
        if (j % 50 == 0) v.evidence.push_back({{p}, gap});
      }
      for (int j = 4; j <= 12; ++j) {
        const double p = std::pow(10.0, -j);
        const double gap = prefs.w_minus(p) - wd(p);
        if (prefs.w_minus(p) < wd(p) * (1.0 - 1e-12) - 1e-15) ok = false;
        v.evidence.push_back({{p}, gap});
      }
      v.holds = ok ? Holds::yes : Holds::no;
      v.rule = "w-(p) - w_delta(p) >= 0 on p = j/1000 and p = 10^-4..10^-12 (evidence: p, difference)";
    }
    verdicts.push_back(std::move(v));
  }

  nlohmann::json elasticity = nlohmann::json::object();
  {
    const ZTransform z = z_transform(prefs.u_minus);
    try {
      const ElasticityEstimate ae = asymptotic_elasticity(z);
      elasticity["ae_z_minus"] = json_number(ae.value.to_double());
    } catch (const std::domain_error& e) {
      elasticity["ae_z_minus"] = e.what();
    }
    verdicts.push_back(check_ae_growth(z, c.number("check.ae_gamma"), c.number("check.ae_x_lower")));
    const auto& u_plus = prefs.u_plus;
    const ElasticityEstimate ae_plus = asymptotic_elasticity([&](double x) { return u_plus(x); });
    elasticity["ae_u_plus"] = json_number(ae_plus.value.to_double());
  }

  nlohmann::json report;
  report["cptq_version"] = kVersion;
  report["command"] = run.command;
  report["config"] = config_json(c);
  report["kernel"] = {{"continuous_cdf", to_json(kernel.continuous_cdf)},
                      {"esssup_infinite", to_json(kernel.esssup_infinite)},
                      {"moments_finite", to_json(kernel.moments_finite)},
                      {"all_hold", kernel.all_hold()}};
  report["verdicts"] = nlohmann::json::array();
  for (const auto& v : verdicts) report["verdicts"].push_back(to_json(v));
  report["elasticity"] = elasticity;
  auto out = open_output(run, "check.json");
  out << report.dump(2) << "\n";

  std::cout << fmt::format("kernel assumptions: {}\n", kernel.all_hold() ? "yes" : "not all verified");
  for (const auto& v : verdicts) {
    std::cout << fmt::format("{}: {}{}\n", v.name, to_string(v.holds),
                             v.classification.empty() ? "" : " (" + v.classification + ")");
  }
  return 0;
}

int cmd_demo(const Run& run) {
  const Config& c = run.config;
  NonattainabilityConfig nc;
  nc.kernel = build_kernel(c);
  nc.prefs = build_preferences(c);
  nc.x0 = c.number("x0");
  nc.n_max = c.integer("demo.n_max");
  nc.gap_tol = c.number("demo.gap_tol");
  const NonattainabilityReport r = demonstrate_nonattainability(nc);

  auto csv = open_output(run, "nonattain.csv");
  csv << header(run, "# ") << fmt::format("# n0 = {}\n# conclusion: {}\n", r.n0, r.conclusion);
  write_report_csv(csv, r);
  auto svg = open_output(run, "nonattain.svg");
  write_report_svg(svg, r, header(run, "  "));
  std::cout << fmt::format("liminf verdict: {}\nn0 = {}\nM = {}\nfinal gap = {}\n{}\n", to_string(r.liminf.holds), r.n0,
                           r.saturation, r.final_gap, r.conclusion);
  return 0;
}

int cmd_optimize(const Run& run) {
  const Config& c = run.config;
  const CptPreferences prefs = build_preferences(c);
  const PricingKernel k = build_kernel(c);
  SolveOptions o;
  o.n = c.integer("optimize.n");
  o.restarts = c.integer("optimize.restarts");
  o.max_iterations = c.integer("optimize.max_iterations");
  o.dp_levels = c.integer("optimize.dp_levels");
  o.lower_bound = c.number("optimize.lower_bound");
  o.upper_bound = c.number("optimize.upper_bound");
  o.enforce_existence = c.flag("optimize.enforce_existence");
  o.delta = c.number("delta");
  o.eta = c.number("eta");
  o.seed = c.u64("seed");
  const SolveResult r = solve(k, prefs, c.number("x0"), o);

  auto pf = open_output(run, "portfolio.csv");
  pf << header(run, "# ");
  write_portfolio_csv(pf, r.portfolio);
  auto diag = open_output(run, "diagnostics.csv");
  diag << header(run, "# ")
       << fmt::format("# restarts = {}\n# best_start = {}\n# converged = {}\n", r.diagnostics.restarts,
                      r.diagnostics.best_start, r.diagnostics.converged);
  write_diagnostics_csv(diag, r.diagnostics);

  double max_neg = 0.0;
  for (double v : r.diagnostics.neg_moment_trace) max_neg = std::max(max_neg, v);
  std::cout << fmt::format("value = {}\ncost = {}\nconverged = {}\niterates = {}\nmax E[(X-)^eta] = {}\n",
                           r.portfolio.cpt.total.to_string(), r.portfolio.cost, r.diagnostics.converged,
                           r.diagnostics.iterates, max_neg);
  const double delta = c.number("delta");
  if (delta > 0.0 && delta < 1.0 && prefs.u_minus.saturation().is_pos_inf()) {
    try {
      const UtilityFunction u = normalize_utility(prefs.u_minus).utility;
      const GFunction g(u, delta, c.number("zeta"));
      const TightnessReport t = tightness_report(r.diagnostics, u, delta, o.eta, c.number("zeta"), g);
      std::cout << fmt::format("moment bound: {} iterates checked, {} violations, {} unevaluated\n", t.checked,
                               t.violations, t.unevaluated);
    } catch (const std::invalid_argument& e) {
      std::cout << "moment bound: not evaluated (" << e.what() << ")\n";
    }
  }
  return 0;
}

int cmd_elasticity(const Run& run) {
  const CptPreferences prefs = build_preferences(run.config);
  const auto& u = prefs.u_minus;
  const ElasticityEstimate ae_u = asymptotic_elasticity([&](double x) { return u(x); });
  const ElasticityEstimate ae_z = asymptotic_elasticity(z_transform(u));
  auto out = open_output(run, "elasticity.csv");
  out << header(run, "# ") << "quantity,x,ratio\n";
  for (const auto& p : ae_u.evidence) out << fmt::format("u_minus,{},{}\n", p.at.at(0), p.value);
  for (const auto& p : ae_z.evidence) out << fmt::format("z_minus,{},{}\n", p.at.at(0), p.value);
  std::cout << fmt::format("AE(u-) = {}\nAE(z-) = {}\n", ae_u.value.to_string(), ae_z.value.to_string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CPT portfolio experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "configuration file (key = value lines)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed, overrides the seed key");
  app.add_option("--set", overrides, "key=value override, applied last");
  app.add_flag_callback("--version", [] {
    std::cout << "cptq " << kVersion << "\n";
    std::exit(0);
  });
  for (const char* name : {"value", "check", "demo-nonattain", "optimize", "elasticity"}) {
    app.add_subcommand(name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Run run;
  run.command = app.get_subcommands().front()->get_name();
  run.out_dir = out_dir;
  try {
    if (!config_path.empty()) run.config.merge_file(config_path);
    run.config.apply_env([](const char* name) { return std::getenv(name); });
    if (seed) run.config.set("seed", std::to_string(*seed));
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
      run.config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    validate(run.config);

    if (run.command == "value") return cmd_value(run);
    if (run.command == "check") return cmd_check(run);
    if (run.command == "demo-nonattain") return cmd_demo(run);
    if (run.command == "optimize") return cmd_optimize(run);
    return cmd_elasticity(run);
  } catch (const ComputationError& e) {
    std::cerr << "cptq: computation error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "cptq: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "cptq: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "cptq: error: " << e.what() << "\n";
    return 3;
  }
}
