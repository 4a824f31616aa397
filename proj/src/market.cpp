#include "cptq/market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "cptq/csv.hpp"
#include "cptq/errors.hpp"
#include "cptq/quadrature.hpp"

namespace cptq {

namespace {

const boost::math::normal& std_normal() {
  static const boost::math::normal n(0.0, 1.0);
  return n;
}

double norm_cdf(double x) { return boost::math::cdf(std_normal(), x); }

double norm_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return boost::math::quantile(std_normal(), p);
}

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

void require_level(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("kernel quantile level {} outside (0, 1)", p));
}

}  // namespace

PricingKernel PricingKernel::lognormal(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("lognormal kernel needs sigma > 0");
  PricingKernel k(Model::lognormal);
  k.sigma_ = sigma;
  return k;
}

PricingKernel PricingKernel::quantile_table(std::vector<double> p, std::vector<double> q) {
  if (p.size() != q.size() || p.size() < 2) throw ParameterError("kernel table needs at least two (p, q) rows");
  if (p.front() != 0.0 || p.back() != 1.0) throw ParameterError("kernel table must cover p = 0 and p = 1");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i > 0 && !(p[i] > p[i - 1])) throw ParameterError("kernel table: p must be strictly increasing");
    if (i > 0 && q[i] < q[i - 1]) throw ParameterError("kernel table: q must be non-decreasing");
    if (q[i] < 0.0 || (i > 0 && !(q[i] > 0.0))) throw ParameterError("kernel table: q must be positive on (0, 1]");
  }
  PricingKernel k(Model::quantile_table);
  k.knot_cum_.assign(p.size(), 0.0);
  for (std::size_t i = 1; i < p.size(); ++i) {
    k.knot_cum_[i] = k.knot_cum_[i - 1] + 0.5 * (p[i] - p[i - 1]) * (q[i] + q[i - 1]);
  }
  k.knot_p_ = std::move(p);
  k.knot_q_ = std::move(q);
  return k;
}

PricingKernel PricingKernel::discrete(std::vector<double> values, std::vector<double> probs) {
  if (values.size() != probs.size() || values.empty()) throw ParameterError("discrete kernel: need matching states and probabilities");
  std::vector<Atom> atoms;
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) throw ParameterError("discrete kernel: states must be positive");
    if (!(probs[i] > 0.0)) throw ParameterError("discrete kernel: probabilities must be positive");
    atoms.push_back({values[i], probs[i]});
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("discrete kernel: probabilities must sum to 1");
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
  PricingKernel k(Model::discrete);
  for (const Atom& a : atoms) {
    if (!k.states_.empty() && k.states_.back().value == a.value) {
      k.states_.back().prob += a.prob;
    } else {
      k.states_.push_back(a);
    }
  }
  double cum = 0.0;
  for (const Atom& a : k.states_) {
    cum += a.prob;
    k.state_cum_.push_back(cum);
  }
  k.state_cum_.back() = 1.0;
  return k;
}

double PricingKernel::quantile(double p) const {
  require_level(p);
  switch (model_) {
    case Model::lognormal:
      return std::exp(mu() + sigma_ * norm_quantile(p));
    case Model::quantile_table: {
      const auto it = std::upper_bound(knot_p_.begin(), knot_p_.end(), p);
      const std::size_t i = static_cast<std::size_t>(it - knot_p_.begin()) - 1;
      const double t = (p - knot_p_[i]) / (knot_p_[i + 1] - knot_p_[i]);
      return knot_q_[i] + t * (knot_q_[i + 1] - knot_q_[i]);
    }
    case Model::discrete:
      for (std::size_t i = 0; i < states_.size(); ++i) {
        if (state_cum_[i] >= p) return states_[i].value;
      }
      return states_.back().value;
  }
  return 0.0;
}

double PricingKernel::upper_quantile(double a) const {
  require_level(a);
  if (model_ == Model::lognormal) return std::exp(mu() - sigma_ * norm_quantile(a));
  if (model_ == Model::discrete) {
    // smallest state whose upper tail (mass strictly above it) is at most a
    double above = 0.0;
    std::size_t best = states_.size() - 1;
    for (std::size_t i = states_.size(); i-- > 0;) {
      if (above > a) break;
      best = i;
      above += states_[i].prob;
    }
    return states_[best].value;
  }
  return quantile(1.0 - a);
}

double PricingKernel::cdf(double x) const {
  switch (model_) {
    case Model::lognormal:
      if (x <= 0.0) return 0.0;
      return norm_cdf((std::log(x) - mu()) / sigma_);
    case Model::quantile_table: {
      const auto it = std::upper_bound(knot_q_.begin(), knot_q_.end(), x);
      const std::size_t j = static_cast<std::size_t>(it - knot_q_.begin());
      if (j == 0) return 0.0;
      if (j == knot_q_.size()) return 1.0;
      const double t = (x - knot_q_[j - 1]) / (knot_q_[j] - knot_q_[j - 1]);
      return knot_p_[j - 1] + t * (knot_p_[j] - knot_p_[j - 1]);
    }
    case Model::discrete: {
      double c = 0.0;
      for (const Atom& s : states_) {
        if (s.value <= x) c += s.prob;
      }
      return std::min(c, 1.0);
    }
  }
  return 0.0;
}

double PricingKernel::lower_partial(double p) const {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return mean();
  switch (model_) {
    case Model::lognormal:
      return norm_cdf(norm_quantile(p) - sigma_);
    case Model::quantile_table: {
      const auto it = std::upper_bound(knot_p_.begin(), knot_p_.end(), p);
      const std::size_t i = static_cast<std::size_t>(it - knot_p_.begin()) - 1;
      return knot_cum_[i] + 0.5 * (p - knot_p_[i]) * (knot_q_[i] + quantile(p));
    }
    case Model::discrete: {
      double sum = 0.0;
      double lo = 0.0;
      for (std::size_t i = 0; i < states_.size(); ++i) {
        sum += states_[i].value * overlap(lo, state_cum_[i], 0.0, p);
        lo = state_cum_[i];
      }
      return sum;
    }
  }
  return 0.0;
}

double PricingKernel::upper_partial(double s) const {
  if (s <= 0.0) return 0.0;
  switch (model_) {
    case Model::lognormal:
      if (s >= 1.0) return 1.0;
      return norm_cdf(sigma_ + norm_quantile(s));
    case Model::quantile_table:
      if (s >= 1.0) return knot_cum_.back();
      return knot_cum_.back() - lower_partial(1.0 - s);
    case Model::discrete: {
      double sum = 0.0;
      double tail = 0.0;
      for (std::size_t i = states_.size(); i-- > 0;) {
        const double next = tail + states_[i].prob;
        sum += states_[i].value * overlap(tail, next, 0.0, s);
        tail = next;
      }
      return sum;
    }
  }
  return 0.0;
}

double PricingKernel::sup() const {
  switch (model_) {
    case Model::lognormal:
      return std::numeric_limits<double>::infinity();
    case Model::quantile_table:
      return knot_q_.back();
    case Model::discrete:
      return states_.back().value;
  }
  return 0.0;
}

bool PricingKernel::has_continuous_cdf() const {
  if (model_ == Model::discrete) return false;
  if (model_ == Model::lognormal) return true;
  for (std::size_t i = 1; i < knot_q_.size(); ++i) {
    if (knot_q_[i] == knot_q_[i - 1]) return false;
  }
  return true;
}

std::string PricingKernel::describe() const {
  switch (model_) {
    case Model::lognormal:
      return fmt::format("lognormal(mu={}, sigma={})", mu(), sigma_);
    case Model::quantile_table:
      return fmt::format("quantile_table({} knots)", knot_p_.size());
    case Model::discrete:
      return fmt::format("discrete({} states)", states_.size());
  }
  return {};
}

PricingKernel load_kernel_table(std::istream& in) {
  const TwoColumnCsv csv = read_two_column_csv(in, "p,q");
  std::vector<double> p;
  std::vector<double> q;
  for (const auto& [a, b] : csv.rows) {
    p.push_back(a);
    q.push_back(b);
  }
  return PricingKernel::quantile_table(std::move(p), std::move(q));
}

PricingKernel load_kernel_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open kernel table " + path.string());
  return load_kernel_table(in);
}

double kernel_quantile(const PricingKernel& k, double p) { return k.quantile(p); }

// ---------------------------------------------------------------------------
// Moments and pairings

namespace {

// q_rho at x, switching to the upper-tail form above the median.
double kernel_at(const PricingKernel& k, double x) { return x < 0.5 ? k.quantile(x) : k.upper_quantile(1.0 - x); }

ExtendedReal integral_to_extended(const UnitIntegral& r) {
  return r.divergent ? ExtendedReal::pos_inf() : ExtendedReal::finite(r.value);
}

// int_0^1 q_rho(x) q_X(g(x)) dx split by the sign of the payoff.
PairingBounds quantile_pairings(const PricingKernel& k, const Law& x) {
  auto pairing = [&](bool anti, bool gains) {
    return integrate_unit_interval([&](double s) {
      const double v = x.quantile_at(anti ? 1.0 - s : s);
      const double part = gains ? std::max(v, 0.0) : std::max(-v, 0.0);
      return part == 0.0 ? 0.0 : kernel_at(k, s) * part;
    });
  };
  auto combine = [](const UnitIntegral& gains, const UnitIntegral& losses) {
    if (losses.divergent) throw InfeasibleError("budget: loss side of the payoff has infinite price");
    return integral_to_extended(gains) - ExtendedReal::finite(losses.value);
  };
  PairingBounds out;
  out.lower = combine(pairing(true, true), pairing(true, false));
  out.upper = combine(pairing(false, true), pairing(false, false));
  return out;
}

PairingBounds discrete_pairings(const PricingKernel& k, const Law& x) {
  double lower = 0.0;
  double upper = 0.0;
  double prev = 0.0;
  for (const Atom& a : x.atoms()) {
    const double next = std::min(prev + a.prob, 1.0);
    lower += a.value * (k.upper_partial(next) - k.upper_partial(prev));
    upper += a.value * (k.lower_partial(next) - k.lower_partial(prev));
    prev = next;
  }
  return {ExtendedReal::finite(lower), ExtendedReal::finite(upper)};
}

}  // namespace

ExtendedReal kernel_moment(const PricingKernel& k, double order) {
  if (k.model() == PricingKernel::Model::discrete) {
    double sum = 0.0;
    for (const Atom& s : k.states()) sum += s.prob * std::pow(s.value, order);
    return ExtendedReal::finite(sum);
  }
  if (k.model() == PricingKernel::Model::lognormal) {
    // log rho ~ N(-sigma^2/2, sigma^2)
    const double s2 = k.sigma() * k.sigma();
    return ExtendedReal::finite(std::exp(0.5 * order * (order - 1.0) * s2));
  }
  return integral_to_extended(integrate_unit_interval([&](double s) { return std::pow(kernel_at(k, s), order); }));
}

ExtendedReal budget(const PricingKernel& k, const Law& x) {
  if (x.is_discrete()) return discrete_pairings(k, x).lower;
  return quantile_pairings(k, x).lower;
}

PairingBounds hardy_littlewood_check(const PricingKernel& k, const Law& x) {
  if (x.is_discrete()) return discrete_pairings(k, x);
  return quantile_pairings(k, x);
}

// ---------------------------------------------------------------------------
// Assumption checks

bool AssumptionReport::all_hold() const {
  return continuous_cdf.holds == Holds::yes && esssup_infinite.holds == Holds::yes && moments_finite.holds == Holds::yes;
}

AssumptionReport check_assumptions(const PricingKernel& k, const AssumptionProbes& probes) {
  AssumptionReport report;

  // Continuity of the CDF: an atom of rho is a flat stretch of q_rho.
  {
    ConditionVerdict& v = report.continuous_cdf;
    v.name = "continuous_cdf";
    if (k.model() == PricingKernel::Model::discrete) {
      v.holds = Holds::no;
      v.rule = "discrete kernel: every state is an atom";
      for (const Atom& s : k.states()) v.evidence.push_back({{s.value}, s.prob});
    } else {
      const std::size_t n = std::size_t{1} << probes.grid_level;
      const double h = 1.0 / static_cast<double>(n);
      double min_gap = std::numeric_limits<double>::infinity();
      double arg = 0.0;
      double prev = kernel_at(k, 0.5 * h);
      const std::size_t stride = std::max<std::size_t>(1, n / 16);
      for (std::size_t j = 1; j < n; ++j) {
        const double p = (static_cast<double>(j) + 0.5) * h;
        const double cur = kernel_at(k, p);
        if (cur - prev < min_gap) {
          min_gap = cur - prev;
          arg = p;
        }
        if (j % stride == 0) v.evidence.push_back({{p}, cur});
        prev = cur;
      }
      v.evidence.push_back({{arg}, min_gap});
      if (k.model() == PricingKernel::Model::lognormal) {
        v.holds = Holds::yes;
        v.rule = "lognormal law has a density; grid increments shown for reference";
      } else {
        v.holds = k.has_continuous_cdf() && min_gap > 0.0 ? Holds::yes : Holds::no;
        v.rule = "table: q must strictly increase on every knot segment and grid cell (last probe is the smallest increment)";
      }
    }
  }

  // Unbounded support: q_rho(1 - 10^-j) must keep growing.
  {
    ConditionVerdict& v = report.esssup_infinite;
    v.name = "esssup_infinite";
    bool increasing = true;
    double prev = 0.0;
    for (int j = 1; j <= probes.tail_levels; ++j) {
      const double a = std::pow(10.0, -j);
      const double q = k.upper_quantile(a);
      if (j > 1 && !(q > prev)) increasing = false;
      prev = q;
      v.evidence.push_back({{a}, q});
    }
    if (k.model() == PricingKernel::Model::lognormal) {
      v.holds = increasing ? Holds::yes : Holds::inconclusive;
      v.rule = "lognormal: tail quantiles strictly increasing at every probe";
    } else {
      v.holds = Holds::no;
      v.evidence.push_back({{0.0}, k.sup()});
      v.rule = "table or discrete kernel is bounded by its largest value (last probe)";
    }
  }

  // Moments of rho and 1/rho.
  {
    ConditionVerdict& v = report.moments_finite;
    v.name = "moments_finite";
    bool all_finite = true;
    for (double p : probes.moment_orders) {
      MomentProbe m{p, kernel_moment(k, p), kernel_moment(k, -p)};
      all_finite = all_finite && m.positive.is_finite() && m.negative.is_finite();
      v.evidence.push_back({{p}, m.positive.to_double()});
      v.evidence.push_back({{-p}, m.negative.to_double()});
      report.moments.push_back(m);
    }
    v.holds = all_finite ? Holds::yes : Holds::no;
    v.rule = k.model() == PricingKernel::Model::lognormal
                 ? "lognormal closed form exp(p (p - 1) sigma^2 / 2) on the moment ladder"
                 : "quadrature of q^p and q^-p on the moment ladder; a fitted endpoint exponent >= 1 counts as divergent";
  }
  return report;
}

}  // namespace cptq
