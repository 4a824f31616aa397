#include "cptq/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "cptq/errors.hpp"

namespace cptq {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
constexpr double kTieRelTol = 1e-12;

double neg_moment(const std::vector<double>& q, double eta) {
  double s = 0.0;
  for (double v : q) {
    if (v < 0.0) s += std::pow(-v, eta);
  }
  return s / static_cast<double>(q.size());
}

void check_existence_regime(const PricingKernel& k, const CptPreferences& prefs, const SolveOptions& opts) {
  if (!(opts.delta > 0.0 && opts.delta < 1.0)) {
    throw ParameterError(fmt::format(
        "solve: existence regime needs delta in (0, 1), got {}; set enforce_existence = false to run anyway",
        opts.delta));
  }
  const DistortionFunction w_delta = associated_distortion(prefs.u_minus, opts.delta);
  std::vector<double> grid;
  for (int j = 1; j <= 999; ++j) grid.push_back(j / 1000.0);
  for (int j = 4; j <= 12; ++j) grid.push_back(std::pow(10.0, -j));
  for (double p : grid) {
    const double lhs = prefs.w_minus(p);
    const double rhs = w_delta(p);
    if (lhs < rhs * (1.0 - 1e-12) - 1e-15) {
      throw ParameterError(fmt::format(
          "solve: w-({}) = {} is below w_delta({}) = {} for delta = {}; the existence regime does not apply", p, lhs,
          p, rhs, opts.delta));
    }
  }
  const ConditionVerdict xi = check_existsxi(prefs.u_minus, opts.delta);
  if (xi.holds != Holds::yes) {
    throw ParameterError(fmt::format("solve: growth condition on u- not verified for delta = {} (verdict {}: {})",
                                     opts.delta, to_string(xi.holds), xi.rule));
  }
  const AssumptionReport report = check_assumptions(k);
  if (!report.all_hold()) {
    throw ParameterError(fmt::format(
        "solve: kernel assumptions not verified (continuous_cdf {}, esssup_infinite {}, moments_finite {})",
        to_string(report.continuous_cdf.holds), to_string(report.esssup_infinite.holds),
        to_string(report.moments_finite.holds)));
  }
}

struct StartResult {
  std::vector<double> q;
  double value = 0.0;
  double neg_moment = 0.0;
  SolveDiagnostics diag;
};

class Ascent {
 public:
  Ascent(const DiscreteProblem& problem, const SolveOptions& opts) : p_(problem), opts_(opts) {}

  [[nodiscard]] std::vector<double> project(const std::vector<double>& y, const std::vector<double>& metric) const {
    return project_budget(y, p_.kappa(), p_.x0(), opts_.lower_bound, opts_.upper_bound, metric);
  }

  // Scaled projected ascent: step g / M and projection in the M-metric, with M the
  // magnitude of the cell curvature (a diagonal Newton model), floored relative to kappa.
  StartResult run(const std::vector<double>& start) const {
    const int n = p_.size();
    const std::vector<double>& kappa = p_.kappa();
    StartResult r;
    std::vector<double> q = project(start, {});
    double f = p_.value(q);
    record(r.diag, q, f, true);

    double t = 1.0;
    std::vector<double> g(n);
    std::vector<double> metric(n);
    std::vector<double> ratio(n);
    std::vector<double> y(n);
    for (int it = 0; it < opts_.max_iterations; ++it) {
      double gmax = 0.0;
      for (int i = 0; i < n; ++i) {
        g[i] = p_.cell_derivative(i, q[i]);
        metric[i] = std::abs(p_.cell_curvature(i, q[i]));
        gmax = std::max(gmax, std::abs(g[i]));
        ratio[i] = metric[i] / kappa[i];
      }
      // the median keeps cells sitting on the kink at 0 from dominating the floor
      std::nth_element(ratio.begin(), ratio.begin() + n / 2, ratio.end());
      const double lambda = ratio[n / 2];
      if (gmax == 0.0) {
        r.diag.converged = true;
        break;
      }
      if (lambda == 0.0 || !std::isfinite(lambda)) {
        metric = kappa;
      } else {
        for (int i = 0; i < n; ++i) metric[i] = std::max(metric[i], 1e-12 * lambda * kappa[i]);
      }
      bool accepted = false;
      for (int bt = 0; bt < kMaxBacktracks; ++bt) {
        for (int i = 0; i < n; ++i) y[i] = q[i] + t * g[i] / metric[i];
        std::vector<double> cand = project(y, metric);
        double slope = 0.0;
        double moved = 0.0;
        for (int i = 0; i < n; ++i) {
          slope += g[i] * (cand[i] - q[i]);
          moved = std::max(moved, std::abs(cand[i] - q[i]));
        }
        if (moved == 0.0) break;
        const double fc = p_.value(cand);
        if (fc > f && fc >= f + kArmijo * slope) {
          q = std::move(cand);
          f = fc;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) {
        r.diag.converged = true;  // no ascent step left at machine resolution
        break;
      }
      t = std::min(2.0 * t, 1e6);
      ++r.diag.iterates;
      record(r.diag, q, f, r.diag.iterates % opts_.snapshot_every == 0);
      const auto& tr = r.diag.value_trace;
      const std::size_t w = static_cast<std::size_t>(opts_.stall_window);
      if (tr.size() > w && std::abs(f - tr[tr.size() - 1 - w]) <= opts_.stall_rel_tol * std::max(1.0, std::abs(f))) {
        r.diag.converged = true;
        break;
      }
    }
    if (r.diag.snapshots.empty() || r.diag.snapshots.back() != q) r.diag.snapshots.push_back(q);
    r.value = f;
    r.neg_moment = neg_moment(q, opts_.eta);
    r.q = std::move(q);
    return r;
  }

 private:
  void record(SolveDiagnostics& d, const std::vector<double>& q, double f, bool snapshot) const {
    d.value_trace.push_back(f);
    d.neg_moment_trace.push_back(neg_moment(q, opts_.eta));
    if (snapshot) d.snapshots.push_back(q);
  }

  const DiscreteProblem& p_;
  const SolveOptions& opts_;
};

// Uniform lattice on a bounded box; otherwise magnitudes spaced geometrically from
// 1e-3 to 1e6 (times max(1, |x0|)) on both sides of 0, so that far-out losses are reachable.
std::vector<double> warm_start_lattice(double x0, const SolveOptions& opts) {
  const int levels = std::max(2, opts.dp_levels);
  std::vector<double> v;
  if (std::isfinite(opts.lower_bound) && std::isfinite(opts.upper_bound)) {
    for (int j = 0; j < levels; ++j) {
      v.push_back(opts.lower_bound + (opts.upper_bound - opts.lower_bound) * j / (levels - 1));
    }
    return v;
  }
  const double unit = std::max(1.0, std::abs(x0));
  const int half = std::max(2, levels / 2);
  v.push_back(0.0);
  v.push_back(x0);
  for (int j = 0; j < half; ++j) {
    const double m = unit * std::pow(10.0, -3.0 + 9.0 * j / (half - 1));
    v.push_back(m);
    v.push_back(-m);
  }
  std::vector<double> out;
  for (double x : v) {
    if (x >= opts.lower_bound && x <= opts.upper_bound) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Lagrangian dynamic program over a value lattice: for a multiplier lambda, the best
// non-decreasing lattice profile of sum_i phi_i(v) - lambda kappa_i v. lambda is
// bisected until the profile fits the budget.
std::vector<double> lattice_warm_start(const DiscreteProblem& p, const SolveOptions& opts) {
  const int n = p.size();
  const std::vector<double> v = warm_start_lattice(p.x0(), opts);
  const int levels = static_cast<int>(v.size());
  std::vector<double> phi(static_cast<std::size_t>(n) * levels);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < levels; ++j) phi[static_cast<std::size_t>(i) * levels + j] = p.cell_value(i, v[j]);
  }
  auto best_profile = [&](double lambda) {
    std::vector<double> acc(levels, 0.0);
    std::vector<int> arg(static_cast<std::size_t>(n) * levels);
    for (int i = 0; i < n; ++i) {
      double run = -std::numeric_limits<double>::infinity();
      int run_j = 0;
      std::vector<double> next(levels);
      for (int j = 0; j < levels; ++j) {
        if (i == 0 || acc[j] > run) {
          run = i == 0 ? 0.0 : acc[j];
          run_j = j;
        }
        next[j] = run + phi[static_cast<std::size_t>(i) * levels + j] - lambda * p.kappa()[i] * v[j];
        arg[static_cast<std::size_t>(i) * levels + j] = run_j;
      }
      acc = std::move(next);
    }
    int j = static_cast<int>(std::max_element(acc.begin(), acc.end()) - acc.begin());
    std::vector<double> q(n);
    for (int i = n - 1; i >= 0; --i) {
      q[i] = v[j];
      j = arg[static_cast<std::size_t>(i) * levels + j];
    }
    return q;
  };
  std::vector<double> q = best_profile(0.0);
  if (p.cost(q) <= p.x0()) return q;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> q_hi = best_profile(hi);
  for (int it = 0; it < 80 && p.cost(q_hi) > p.x0(); ++it) {
    lo = hi;
    hi *= 4.0;
    q_hi = best_profile(hi);
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    std::vector<double> qm = best_profile(mid);
    if (p.cost(qm) <= p.x0()) {
      hi = mid;
      q_hi = std::move(qm);
    } else {
      lo = mid;
    }
  }
  return q_hi;
}

}  // namespace

Law QuantilePortfolio::law() const {
  std::vector<Atom> atoms;
  atoms.reserve(q.size());
  const double m = 1.0 / static_cast<double>(q.size());
  for (double v : q) atoms.push_back({v, m});
  return Law::discrete(std::move(atoms));
}

DiscreteProblem::DiscreteProblem(const PricingKernel& k, const CptPreferences& prefs, double x0, int n)
    : prefs_(prefs), x0_(x0) {
  if (n < 1) throw ParameterError("solve: N must be positive");
  if (!std::isfinite(x0)) throw ParameterError("solve: x0 must be finite");
  const double dn = static_cast<double>(n);
  kappa_.resize(n);
  pi_plus_.resize(n);
  pi_minus_.resize(n);
  for (int i = 1; i <= n; ++i) {
    // cell N+1-i of the kernel quantile is ((N-i)/N, (N-i+1)/N)
    kappa_[i - 1] = k.lower_partial((n - i + 1) / dn) - k.lower_partial((n - i) / dn);
    pi_plus_[i - 1] = prefs.w_plus((n - i + 1) / dn) - prefs.w_plus((n - i) / dn);
    pi_minus_[i - 1] = prefs.w_minus(i / dn) - prefs.w_minus((i - 1) / dn);
    if (!(kappa_[i - 1] > 0.0)) {
      throw ParameterError(fmt::format("solve: kernel cell {} has no mass; refine or change N", n - i + 1));
    }
  }
}

double DiscreteProblem::cell_value(int i, double x) const {
  if (x >= 0.0) return pi_plus_[i] * prefs_.u_plus(x);
  return -pi_minus_[i] * prefs_.u_minus(-x);
}

double DiscreteProblem::cell_derivative(int i, double x) const {
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (cell_value(i, x + h) - cell_value(i, x - h)) / (2.0 * h);
}

double DiscreteProblem::cell_curvature(int i, double x) const {
  const double h = 1e-4 * std::max(1.0, std::abs(x));
  return (cell_value(i, x + h) - 2.0 * cell_value(i, x) + cell_value(i, x - h)) / (h * h);
}

double DiscreteProblem::value(const std::vector<double>& q) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += cell_value(i, q[i]);
  return s;
}

double DiscreteProblem::cost(const std::vector<double>& q) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += kappa_[i] * q[i];
  return s;
}

std::vector<double> isotonic_regression(const std::vector<double>& y, const std::vector<double>& weights) {
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], weights[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      const double w = a.weight + b.weight;
      a.mean = (a.mean * a.weight + b.mean * b.weight) / w;
      a.weight = w;
      a.count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

std::vector<double> project_budget(const std::vector<double>& y, const std::vector<double>& kappa, double x0,
                                   double lo, double hi, const std::vector<double>& metric) {
  const double total = std::accumulate(kappa.begin(), kappa.end(), 0.0);
  if (std::isfinite(lo) && lo * total > x0 * (1.0 + 1e-12) + 1e-15) {
    throw InfeasibleError(fmt::format("budget set empty: the cheapest admissible profile costs {} > x0 = {}",
                                      lo * total, x0));
  }
  auto cost = [&](const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += kappa[i] * q[i];
    return s;
  };
  // q(mu) = clip(iso_M(y - mu kappa / M)); in the kappa metric the shift is uniform
  // and commutes with the isotonic fit.
  const bool kappa_metric = metric.empty();
  const std::vector<double>& m = kappa_metric ? kappa : metric;
  const std::vector<double> z = isotonic_regression(y, m);
  std::vector<double> target(y.size());
  auto at = [&](double mu) {
    std::vector<double> q;
    if (kappa_metric || mu == 0.0) {
      q = z;
      for (double& v : q) v -= mu;
    } else {
      for (std::size_t i = 0; i < y.size(); ++i) target[i] = y[i] - mu * kappa[i] / m[i];
      q = isotonic_regression(target, m);
    }
    for (double& v : q) v = std::clamp(v, lo, hi);
    return q;
  };
  std::vector<double> q = at(0.0);
  const double c0 = cost(q);
  if (c0 <= x0) return q;
  double scale = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) scale += kappa[i] * kappa[i] / m[i];
  double mu_hi = (c0 - x0) / scale;
  if (kappa_metric && !std::isfinite(lo) && !std::isfinite(hi)) return at(mu_hi);
  double mu_lo = 0.0;
  q = at(mu_hi);
  while (cost(q) > x0) {
    mu_lo = mu_hi;
    mu_hi *= 2.0;
    q = at(mu_hi);
  }
  for (int it = 0; it < 200 && mu_hi - mu_lo > 1e-15 * mu_hi; ++it) {
    const double mid = 0.5 * (mu_lo + mu_hi);
    std::vector<double> qm = at(mid);
    if (cost(qm) > x0) {
      mu_lo = mid;
    } else {
      mu_hi = mid;
      q = std::move(qm);
    }
  }
  return q;
}

SolveResult solve(const PricingKernel& k, const CptPreferences& prefs, double x0, const SolveOptions& opts) {
  if (!(opts.lower_bound < opts.upper_bound)) throw ParameterError("solve: lower_bound must be below upper_bound");
  if (opts.restarts < 0 || opts.max_iterations < 1 || opts.stall_window < 1 || opts.snapshot_every < 1) {
    throw ParameterError("solve: restarts, max_iterations, stall_window and snapshot_every must be positive");
  }
  if (opts.enforce_existence) check_existence_regime(k, prefs, opts);

  const DiscreteProblem problem(k, prefs, x0, opts.n);
  const Ascent ascent(problem, opts);
  const int n = problem.size();
  const bool bounded = std::isfinite(opts.lower_bound) && std::isfinite(opts.upper_bound);

  std::vector<std::vector<double>> starts;
  starts.emplace_back(n, std::clamp(x0, opts.lower_bound, opts.upper_bound));
  const double spread = 1.0 + std::abs(x0);
  for (int s = 0; s < opts.restarts; ++s) {
    std::mt19937_64 rng(opts.seed * 1000003ULL + static_cast<std::uint64_t>(s));
    std::uniform_real_distribution<double> unif(bounded ? opts.lower_bound : x0 - spread,
                                                bounded ? opts.upper_bound : x0 + spread);
    std::vector<double> q(n);
    for (double& v : q) v = unif(rng);
    std::sort(q.begin(), q.end());
    starts.push_back(std::move(q));
  }
  if (opts.dp_warm_start) starts.push_back(lattice_warm_start(problem, opts));

  std::optional<StartResult> best;
  SolveDiagnostics summary;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    StartResult r = ascent.run(starts[s]);
    summary.start_values.push_back(r.value);
    const bool better =
        !best || r.value > best->value + kTieRelTol * std::max(1.0, std::abs(best->value)) ||
        (r.value >= best->value - kTieRelTol * std::max(1.0, std::abs(best->value)) && r.neg_moment < best->neg_moment);
    if (better) {
      summary.best_start = static_cast<int>(s);
      best = std::move(r);
    }
  }
  SolveResult out;
  out.diagnostics = std::move(best->diag);
  out.diagnostics.restarts = static_cast<int>(starts.size());
  out.diagnostics.best_start = summary.best_start;
  out.diagnostics.start_values = std::move(summary.start_values);

  QuantilePortfolio& pf = out.portfolio;
  pf.q = std::move(best->q);
  pf.grid.resize(n);
  for (int i = 0; i < n; ++i) pf.grid[i] = (i + 0.5) / n;
  const auto [cpt, cost] = value_and_cost(pf, k, prefs);
  pf.cpt = cpt;
  pf.cost = cost;
  return out;
}

std::pair<CptValue, double> value_and_cost(const QuantilePortfolio& portfolio, const PricingKernel& k,
                                           const CptPreferences& prefs) {
  if (portfolio.q.empty()) throw ParameterError("value_and_cost: empty profile");
  if (!std::is_sorted(portfolio.q.begin(), portfolio.q.end())) {
    throw ParameterError("value_and_cost: quantile profile must be non-decreasing");
  }
  const Law law = portfolio.law();
  return {cpt_value(law, prefs), budget(k, law).value()};
}

TightnessReport tightness_report(const SolveDiagnostics& diag, const UtilityFunction& u_normalized, double delta,
                                 double eta, double zeta, const GFunction& g) {
  TightnessReport r;
  for (const auto& q : diag.snapshots) {
    std::vector<Atom> atoms;
    const double m = 1.0 / static_cast<double>(q.size());
    for (double v : q) atoms.push_back({std::max(-v, 0.0), m});
    const Law loss = Law::discrete(std::move(atoms));
    InequalitySides s;
    try {
      s = moment_bound_exeta(loss, u_normalized, delta, eta, zeta, g);
    } catch (const ComputationError&) {
      ++r.unevaluated;  // G has no finite value at 1 / V_delta
      continue;
    }
    ++r.checked;
    if (!s.holds()) ++r.violations;
    r.max_neg_moment = std::max(r.max_neg_moment, s.lhs);
    r.min_margin = std::min(r.min_margin, s.rhs - s.lhs);
    r.sides.push_back(s);
  }
  return r;
}

void write_portfolio_csv(std::ostream& out, const QuantilePortfolio& portfolio) {
  out << "p,q\n";
  for (std::size_t i = 0; i < portfolio.q.size(); ++i) out << fmt::format("{},{}\n", portfolio.grid[i], portfolio.q[i]);
}

void write_diagnostics_csv(std::ostream& out, const SolveDiagnostics& diag) {
  out << "iteration,value,neg_moment\n";
  for (std::size_t i = 0; i < diag.value_trace.size(); ++i) {
    out << fmt::format("{},{},{}\n", i, diag.value_trace[i], diag.neg_moment_trace[i]);
  }
}

}  // namespace cptq
