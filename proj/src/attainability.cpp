#include "cptq/attainability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "cptq/errors.hpp"
#include "cptq/quadrature.hpp"

namespace cptq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> tail_points(const TailGrid& g) {
  std::vector<double> xs;
  double x = g.x0;
  for (int j = 0; j <= g.max_steps && x <= g.cap; ++j, x *= g.ratio) xs.push_back(x);
  return xs;
}

// Least-squares slope of ys against xs.
double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

enum class Trend { up, down, neither };

// Probes of a tail sequence and whether it runs off to +-threshold monotonically
// over the second half of the grid.
struct TailSequence {
  std::vector<Probe> probes;
  bool defined = true;

  [[nodiscard]] Trend trend(double threshold, std::size_t min_points) const {
    if (!defined || probes.size() < min_points) return Trend::neither;
    const std::size_t n = probes.size();
    bool up = true;
    bool down = true;
    for (std::size_t i = n / 2; i + 1 < n; ++i) {
      up = up && probes[i + 1].value >= probes[i].value;
      down = down && probes[i + 1].value <= probes[i].value;
    }
    const double last = probes.back().value;
    if (up && last > threshold) return Trend::up;
    if (down && last < -threshold) return Trend::down;
    return Trend::neither;
  }
};

// f(t) on the tail grid, stopping at the first non-finite value or past t_limit.
TailSequence tail_sequence(const std::function<double(double)>& f, const TailGrid& grid, double t_limit) {
  TailSequence seq;
  for (double t : tail_points(grid)) {
    if (t > t_limit) break;
    double v = 0.0;
    try {
      v = f(t);
    } catch (const DomainError&) {
      seq.defined = false;
      break;
    }
    if (!std::isfinite(v)) break;
    seq.probes.push_back({{t}, v});
  }
  return seq;
}

void require_unbounded(const UtilityFunction& u, const char* who) {
  if (u.bounded()) throw ParameterError(fmt::format("{}: needs a utility with u(+inf) = +inf", who));
}

void require_normalized(const UtilityFunction& u, const char* who) {
  if (std::abs(u(1.0) - 1.0) > 1e-9) throw ParameterError(fmt::format("{}: utility must satisfy u(1) = 1", who));
}

// Shared driver for the two readings of the growth condition: the condition holds
// when some ladder value runs off in `holds_trend`, fails when all run the other way.
ConditionVerdict growth_condition(const std::string& name, const std::string& pname, const ExistsXiOptions& opts,
                                  const std::function<TailSequence(double)>& sequence_for, const std::string& rule,
                                  Trend holds_trend) {
  ConditionVerdict v;
  v.name = name;
  v.rule = rule;
  const Trend fails_trend = holds_trend == Trend::up ? Trend::down : Trend::up;
  std::vector<Probe> first_evidence;
  bool all_fail = true;
  for (double s : opts.ladder) {
    const TailSequence seq = sequence_for(s);
    if (first_evidence.empty()) first_evidence = seq.probes;
    const Trend tr = seq.trend(opts.threshold, static_cast<std::size_t>(opts.grid.min_points));
    if (tr == holds_trend) {
      v.holds = Holds::yes;
      v.parameter = s;
      v.parameter_name = pname;
      v.evidence = seq.probes;
      return v;
    }
    all_fail = all_fail && tr == fails_trend;
  }
  v.holds = all_fail ? Holds::no : Holds::inconclusive;
  v.evidence = std::move(first_evidence);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

ConditionVerdict liminf_condition(const DistortionFunction& w_minus, const UtilityFunction& u_minus,
                                  const LiminfOptions& opts) {
  ConditionVerdict v;
  v.name = "liminf_condition";
  v.rule = fmt::format(
      "fit log(w(x) u(1/x)) against log x over the last {} probes: slope > {} -> no; slope < -{} -> yes; "
      "otherwise yes iff the products are non-decreasing as x decreases",
      opts.fit_points, opts.slope_tol, opts.slope_tol);
  std::vector<double> log_x;
  std::vector<double> log_prod;
  for (int j = 1; j <= opts.decades; ++j) {
    const double t = j * std::numbers::ln10;
    const double lp = w_minus.log_value(std::exp(-t)) + u_minus.log_at_log(t);
    log_x.push_back(-t);
    log_prod.push_back(lp);
    v.evidence.push_back({{std::pow(10.0, -j)}, std::exp(lp)});
  }
  const auto tail = static_cast<std::ptrdiff_t>(std::min<int>(opts.fit_points, opts.decades));
  const std::vector<double> fx(log_x.end() - tail, log_x.end());
  const std::vector<double> fy(log_prod.end() - tail, log_prod.end());
  const double slope = fit_slope(fx, fy);
  v.evidence.push_back({{0.0}, slope});  // last probe carries the fitted slope
  double liminf_est = kInf;
  bool non_decreasing = true;
  for (std::size_t i = 0; i < fy.size(); ++i) {
    liminf_est = std::min(liminf_est, std::exp(fy[i]));
    if (i > 0 && fy[i] < fy[i - 1] + std::log1p(-1e-9)) non_decreasing = false;
  }
  v.parameter = liminf_est;
  v.parameter_name = "liminf_estimate";
  if (slope > opts.slope_tol) {
    v.holds = Holds::no;
  } else if (slope < -opts.slope_tol) {
    v.holds = Holds::yes;
  } else {
    v.holds = non_decreasing && liminf_est > 0.0 ? Holds::yes : Holds::inconclusive;
  }
  return v;
}

ConditionVerdict check_existsxi(const UtilityFunction& u_minus, double delta, const ExistsXiOptions& opts) {
  require_unbounded(u_minus, "check_existsxi");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("check_existsxi: delta must lie in (0, 1)");
  const ZTransform z = z_transform(u_minus);
  return growth_condition(
      "existsxi", "varsigma", opts,
      [&](double s) {
        return tail_sequence([&](double x) { return z(x) - delta * z(s * x); }, opts.grid,
                             u_minus.log_data_limit() / s);
      },
      fmt::format("z(x) - delta z(varsigma x) on x = 2^j <= 1e12 for varsigma in the ladder: yes if it exceeds {} and "
                  "is non-decreasing over the last half; no if every varsigma drops below -{} monotonically",
                  opts.threshold, opts.threshold),
      Trend::up);
}

ConditionVerdict existsxi_ratio_test(const UtilityFunction& u_minus, double delta, const ExistsXiOptions& opts) {
  require_unbounded(u_minus, "existsxi_ratio_test");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("existsxi_ratio_test: delta must lie in (0, 1)");
  // log of [u(x^xi)]^delta / u(x) at x = e^t
  return growth_condition(
      "existsxi_ratio", "xi", opts,
      [&](double xi) {
        return tail_sequence(
            [&](double t) { return delta * u_minus.log_at_log(xi * t) - u_minus.log_at_log(t); }, opts.grid,
            u_minus.log_data_limit() / xi);
      },
      fmt::format("log([u(x^xi)]^delta / u(x)) at x = e^t, t = 2^j <= 1e12: yes if it falls below -{} and is "
                  "non-increasing over the last half; no if every xi runs above {} monotonically",
                  opts.threshold, opts.threshold),
      Trend::down);
}

ConditionVerdict check_delta_threshold(const UtilityFunction& u_minus, double delta) {
  if (!(delta > 0.0)) throw ParameterError("check_delta_threshold: delta must be positive");
  ConditionVerdict v;
  v.name = "delta_threshold";
  v.parameter = delta;
  v.parameter_name = "delta";
  if (u_minus.bounded()) {
    v.holds = Holds::no;
    v.classification = "invalid";
    v.rule = "bounded utility on losses: the associated distortion does not exist and the problem is not attainable";
    double x = 1.0;
    for (int j = 0; j < 8; ++j, x *= 10.0) v.evidence.push_back({{x}, u_minus(x)});
    v.evidence.push_back({{kInf}, u_minus.saturation().to_double()});
    return v;
  }
  const DistortionFunction w = associated_distortion(u_minus, delta);
  ConditionVerdict lim = liminf_condition(w, u_minus);
  v.evidence = lim.evidence;
  v.attached.push_back(lim);
  if (delta > 1.0) {
    v.holds = Holds::no;
    v.classification = "not_attainable";
    v.rule = "delta > 1: w_delta(x) u(1/x) -> 0, so the loss side can be pushed to -inf";
  } else if (delta == 1.0) {
    v.classification = "boundary";
    if (u_minus.kind() == UtilityFunction::Kind::power) {
      v.holds = Holds::no;
      v.rule = "delta = 1 with a power utility: equal exponents, existence fails";
    } else {
      v.holds = Holds::inconclusive;
      v.rule = "delta = 1: boundary case, undecided outside the power family";
    }
  } else {
    ConditionVerdict xi = check_existsxi(u_minus, delta);
    v.holds = xi.holds;
    v.classification = xi.holds == Holds::yes ? "attainable" : "undetermined";
    v.rule = "delta < 1: attainable when the growth condition on u holds (attached)";
    v.attached.push_back(std::move(xi));
  }
  return v;
}

// ---------------------------------------------------------------------------

ElasticityEstimate asymptotic_elasticity(const std::function<double(double)>& f, const ElasticityOptions& opts) {
  std::vector<Probe> all;
  for (double x : tail_points(opts.grid)) {
    const double h = opts.rel_step * x;
    const double fx = f(x);
    const double hi = f(x + h);
    const double lo = f(x - h);
    if (!std::isfinite(fx) || !std::isfinite(hi) || !std::isfinite(lo)) break;
    if (!(fx > 0.0)) {
      all.push_back({{x}, std::numeric_limits<double>::quiet_NaN()});
      continue;
    }
    all.push_back({{x}, x * (hi - lo) / (2.0 * h) / fx});
  }
  const auto window = static_cast<std::size_t>(opts.window);
  if (all.size() < window) throw ComputationError("asymptotic_elasticity: function not finite on enough tail probes");
  ElasticityEstimate est;
  est.evidence.assign(all.end() - static_cast<std::ptrdiff_t>(window), all.end());
  double m = 0.0;
  for (const Probe& p : est.evidence) {
    if (std::isnan(p.value)) throw DomainError("asymptotic_elasticity: function is not positive on the tail");
    m = std::max(m, p.value);
  }
  est.value = ExtendedReal::from_double(m);
  return est;
}

ElasticityEstimate asymptotic_elasticity(const ZTransform& z, const ElasticityOptions& opts) {
  return asymptotic_elasticity([&z](double x) { return z(x); }, opts);
}

ConditionVerdict check_ae_growth(const ZTransform& z, double gamma, double x_lower) {
  if (!(gamma > 0.0) || !(x_lower > 0.0)) throw ParameterError("check_ae_growth: gamma and x_lower must be positive");
  ConditionVerdict v;
  v.name = "ae_growth";
  v.parameter = gamma;
  v.parameter_name = "gamma";
  v.rule = "z(lambda x) <= lambda^gamma z(x) at lambda = 10^(i/2), i = 0..8 and x = x_lower 10^(j/2), j = 0..12; "
           "probe values are the margins";
  bool ok = true;
  for (int i = 0; i <= 8; ++i) {
    const double lambda = std::pow(10.0, i / 2.0);
    for (int j = 0; j <= 12; ++j) {
      const double x = x_lower * std::pow(10.0, j / 2.0);
      const double bound = std::pow(lambda, gamma) * z(x);
      const double margin = bound - z(lambda * x);
      if (margin < -1e-12 * std::max(1.0, std::abs(bound))) ok = false;
      v.evidence.push_back({{lambda, x}, margin});
    }
  }
  v.holds = ok ? Holds::yes : Holds::no;
  return v;
}

ConditionVerdict growth_cap_probe(const UtilityFunction& u, double gamma, double c1, double c2) {
  ConditionVerdict v;
  v.name = "growth_cap";
  v.parameter = gamma;
  v.parameter_name = "gamma";
  v.rule = fmt::format("u(x) <= {} x^gamma + {} on x = 2^j <= 1e12", c1, c2);
  bool ok = true;
  for (double x : tail_points(TailGrid{})) {
    const double cap = c1 * std::pow(x, gamma) + c2;
    const double ux = u(x);
    if (ux > cap * (1.0 + 1e-12)) ok = false;
    v.evidence.push_back({{x}, cap - ux});
  }
  v.holds = ok ? Holds::yes : Holds::no;
  return v;
}

// ---------------------------------------------------------------------------

GFunction::GFunction(UtilityFunction u_normalized, double delta, double zeta)
    : u_(std::move(u_normalized)), delta_(delta), zeta_(zeta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("g_function: delta must lie in (0, 1)");
  if (!(zeta > 1.0)) throw ParameterError("g_function: zeta must exceed 1");
  require_unbounded(u_, "g_function");
  require_normalized(u_, "g_function");
}

double GFunction::operator()(double lambda) const {
  if (!(lambda > 0.0)) throw DomainError("g_eval: lambda must be positive");
  const double log_lambda = std::log(lambda);
  // Condition at x = e^t, in logs: (log lambda + z(t)) / delta - z(zeta t) > 0.
  auto holds_at = [&](double t) {
    return (log_lambda + u_.log_at_log(t)) / delta_ - u_.log_at_log(zeta_ * t) > 0.0;
  };
  const double t_max = std::log(kProbeLimit);
  const double step = std::numbers::ln2 / 4.0;
  std::vector<double> ts;
  for (double t = 0.0; t < t_max; t += step) ts.push_back(t);
  ts.push_back(t_max);
  std::ptrdiff_t last_fail = -1;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!holds_at(ts[i])) last_fail = static_cast<std::ptrdiff_t>(i);
  }
  if (last_fail < 0) return 1.0;
  if (static_cast<std::size_t>(last_fail) + 1 == ts.size()) {
    throw ComputationError(fmt::format("g_eval: inequality still fails at x = {} for lambda = {}", kProbeLimit, lambda));
  }
  double lo = ts[static_cast<std::size_t>(last_fail)];
  double hi = ts[static_cast<std::size_t>(last_fail) + 1];
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (holds_at(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return std::exp(hi);
}

GFunction g_function(const UtilityFunction& u_normalized, double delta, double zeta) {
  return GFunction(u_normalized, delta, zeta);
}

double g_eval(const GFunction& g, double lambda) { return g(lambda); }

MonotoneMap MonotoneMap::identity() {
  return {[](double x) { return x; }, [](double y) { return y; }, "identity"};
}

MonotoneMap MonotoneMap::power(double s) {
  if (!(s > 0.0)) throw ParameterError("MonotoneMap::power needs s > 0");
  return {[s](double x) { return std::pow(x, s); }, [s](double y) { return std::pow(y, 1.0 / s); },
          fmt::format("x^{}", s)};
}

MonotoneMap MonotoneMap::utility(const UtilityFunction& u) {
  return {[u](double x) { return u(x); }, [u](double y) { return u.inverse(y); }, u.describe()};
}

namespace {

// P{g(X) > t} for increasing g; exact for atoms, through the survival function otherwise.
double exceedance(const Law& x, const std::function<double(double)>& g, double g_inverse_t, double t) {
  if (!x.is_discrete()) return survival(x, g_inverse_t);
  double p = 0.0;
  for (const Atom& a : x.atoms()) {
    if (g(a.value) > t) p += a.prob;
  }
  return std::min(p, 1.0);
}

void require_nonnegative(const Law& x, const char* who) {
  if (x.is_discrete() && x.atoms().front().value < 0.0) {
    throw DomainError(fmt::format("{}: law must be supported on [0, inf)", who));
  }
}

}  // namespace

InequalitySides tail_bound_wpfx(const Law& x, const UtilityFunction& u_minus, const DistortionFunction& w_minus,
                                const MonotoneMap& f, double t) {
  if (!(t > 0.0)) throw DomainError("tail_bound_wpfx: t must be positive");
  require_unbounded(u_minus, "tail_bound_wpfx");
  require_nonnegative(x, "tail_bound_wpfx");
  const double level = f.inverse(t);
  InequalitySides s;
  s.lhs = w_minus(exceedance(x, f.forward, level, t));
  s.rhs = choquet_positive(x, u_minus, w_minus).to_double() / u_minus(level);
  return s;
}

double v_delta(const Law& x, const UtilityFunction& u_normalized, double delta) {
  return choquet_positive(x, u_normalized, associated_distortion(u_normalized, delta)).to_double();
}

InequalitySides tail_bound_pxs(const Law& x, const UtilityFunction& u_normalized, double delta, double s, double t) {
  if (!(t > 0.0)) throw DomainError("tail_bound_pxs: t must be positive");
  if (!(s > 0.0)) throw ParameterError("tail_bound_pxs: s must be positive");
  require_normalized(u_normalized, "tail_bound_pxs");
  require_nonnegative(x, "tail_bound_pxs");
  const double root = std::pow(t, 1.0 / s);
  InequalitySides out;
  out.lhs = exceedance(x, [s](double v) { return std::pow(v, s); }, root, t);
  const double vd = v_delta(x, u_normalized, delta);
  if (vd == 0.0) return out;
  const double y = std::pow(u_normalized(root) / vd, 1.0 / delta);
  out.rhs = std::isfinite(y) ? 1.0 / u_normalized.inverse(y) : 0.0;
  return out;
}

ExtendedReal law_moment(const Law& x, double eta) {
  if (x.is_discrete()) {
    require_nonnegative(x, "law_moment");
    double m = 0.0;
    for (const Atom& a : x.atoms()) m += a.prob * std::pow(a.value, eta);
    return ExtendedReal::finite(m);
  }
  const UnitIntegral r = integrate_unit_interval([&](double p) {
    const double q = x.quantile_at(p);
    if (q < 0.0) throw DomainError("law_moment: law must be supported on [0, inf)");
    return std::pow(q, eta);
  });
  return r.divergent ? ExtendedReal::pos_inf() : ExtendedReal::finite(r.value);
}

InequalitySides moment_bound_exeta(const Law& x, const UtilityFunction& u_normalized, double delta, double eta,
                                   double zeta, const GFunction& g) {
  if (!(eta > 1.0 && eta < zeta)) throw ParameterError("moment_bound_exeta: eta must lie in (1, zeta)");
  require_normalized(u_normalized, "moment_bound_exeta");
  InequalitySides out;
  out.lhs = law_moment(x, eta).to_double();
  const double c = 1.0 + eta / (zeta - eta);
  const double vd = v_delta(x, u_normalized, delta);
  if (vd == 0.0) {
    out.rhs = c;
    return out;
  }
  if (!std::isfinite(vd)) {
    out.rhs = kInf;
    return out;
  }
  out.rhs = c + std::pow(g(1.0 / vd), eta) / u_normalized.inverse(std::pow(vd, -1.0 / delta));
  return out;
}

}  // namespace cptq
