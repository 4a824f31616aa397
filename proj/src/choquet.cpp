#include "cptq/choquet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "cptq/csv.hpp"
#include "cptq/errors.hpp"

namespace cptq {

// ---------------------------------------------------------------------------
// Law

Law Law::discrete(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ParameterError("discrete law needs at least one atom");
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.value)) throw ParameterError("discrete law: atom values must be finite");
    if (!(a.prob > 0.0) || !std::isfinite(a.prob)) throw ParameterError("discrete law: probabilities must be positive");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParameterError(fmt::format("discrete law: probabilities sum to {} instead of 1", total));
  }
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
  Law law;
  law.atoms_ = std::move(atoms);
  law.description_ = fmt::format("discrete({} atoms)", law.atoms_.size());
  return law;
}

Law Law::constant(double value) { return discrete({{value, 1.0}}); }

Law Law::quantile(QuantileFn q, std::string description) {
  if (!q) throw ParameterError("quantile law needs a quantile function");
  Law law;
  law.quantile_ = std::make_shared<const QuantileFn>(std::move(q));
  law.description_ = std::move(description);
  return law;
}

double Law::quantile_at(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("quantile level {} outside (0, 1)", p));
  if (quantile_) return (*quantile_)(p);
  double cum = 0.0;
  for (const Atom& a : atoms_) {
    cum += a.prob;
    if (cum >= p) return a.value;
  }
  return atoms_.back().value;
}

Law Law::positive_part() const {
  if (quantile_) {
    auto q = quantile_;
    return quantile([q](double p) { return std::max((*q)(p), 0.0); }, "(" + description_ + ")+");
  }
  std::vector<Atom> out;
  out.reserve(atoms_.size());
  for (const Atom& a : atoms_) out.push_back({std::max(a.value, 0.0), a.prob});
  Law law = discrete(std::move(out));
  return law;
}

Law Law::negative_part() const {
  if (quantile_) {
    auto q = quantile_;
    return quantile([q](double p) { return std::max(-(*q)(1.0 - p), 0.0); }, "(" + description_ + ")-");
  }
  std::vector<Atom> out;
  out.reserve(atoms_.size());
  for (const Atom& a : atoms_) out.push_back({std::max(-a.value, 0.0), a.prob});
  return discrete(std::move(out));
}

Law Law::scaled(double c) const {
  if (!(c > 0.0)) throw ParameterError("Law::scaled needs c > 0");
  if (quantile_) {
    auto q = quantile_;
    return quantile([q, c](double p) { return c * (*q)(p); }, fmt::format("{} * ({})", c, description_));
  }
  std::vector<Atom> out(atoms_.begin(), atoms_.end());
  for (Atom& a : out) a.value *= c;
  return discrete(std::move(out));
}

std::string Law::describe() const { return description_; }

Law parse_discrete_law(std::istream& in) {
  const TwoColumnCsv csv = read_two_column_csv(in, "value,prob");
  std::vector<Atom> atoms;
  atoms.reserve(csv.rows.size());
  for (const auto& [v, p] : csv.rows) atoms.push_back({v, p});
  return Law::discrete(std::move(atoms));
}

Law load_discrete_law(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open law file " + path);
  return parse_discrete_law(in);
}

void write_discrete_law(std::ostream& out, const Law& law) {
  out << "value,prob\n";
  for (const Atom& a : law.atoms()) out << fmt::format("{},{}\n", a.value, a.prob);
}

// ---------------------------------------------------------------------------
// Survival and Choquet integrals

double survival(const Law& law, double t) {
  if (law.is_discrete()) {
    double tail = 0.0;
    const auto atoms = law.atoms();
    for (auto it = atoms.rbegin(); it != atoms.rend() && it->value > t; ++it) tail += it->prob;
    return std::min(tail, 1.0);
  }
  // F(t) = sup{p : q(p) <= t} by bisection on the level.
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 64; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (law.quantile_at(mid) <= t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 1.0 - lo;
}

namespace {

ExtendedReal choquet_discrete(const Law& law, const UtilityFunction& u, const DistortionFunction& w) {
  const auto atoms = law.atoms();
  if (atoms.front().value < 0.0) throw DomainError("choquet_positive: law has negative support");
  // Walk the distinct levels from the top; tail accumulates P{X >= level}.
  double total = 0.0;
  double tail = 0.0;
  std::size_t i = atoms.size();
  while (i > 0) {
    const double level = atoms[i - 1].value;
    while (i > 0 && atoms[i - 1].value == level) {
      tail += atoms[i - 1].prob;
      --i;
    }
    if (i == 0) tail = 1.0;  // the whole law; summed masses may fall an ulp short
    const double below = i > 0 ? u(atoms[i - 1].value) : 0.0;
    total += w(std::min(tail, 1.0)) * (u(level) - below);
  }
  return ExtendedReal::finite(total);
}

struct StieltjesSum {
  double raw = 0.0;
  double capped = 0.0;
  double capped_twice = 0.0;
};

StieltjesSum stieltjes_sum(const Law& law, const UtilityFunction& u, const DistortionFunction& w, int level,
                           double y_max) {
  const std::size_t n = std::size_t{1} << level;
  const double h = 1.0 / static_cast<double>(n);
  StieltjesSum s;
  double w_prev = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w_next = w(static_cast<double>(j + 1) * h);
    const double dw = w_next - w_prev;
    w_prev = w_next;
    const double x = law.quantile_at(1.0 - (static_cast<double>(j) + 0.5) * h);
    if (x < 0.0) throw DomainError("choquet_positive: law has negative support");
    const double ux = u(x);
    s.raw += ux * dw;
    s.capped += std::min(ux, y_max) * dw;
    s.capped_twice += std::min(ux, 2.0 * y_max) * dw;
  }
  return s;
}

ExtendedReal choquet_quantile(const Law& law, const UtilityFunction& u, const DistortionFunction& w,
                              const ChoquetOptions& opts) {
  StieltjesSum prev = stieltjes_sum(law, u, w, opts.min_level, opts.y_max);
  StieltjesSum cur = prev;
  for (int level = opts.min_level + 1; level <= opts.max_level; ++level) {
    cur = stieltjes_sum(law, u, w, level, opts.y_max);
    const double change = std::abs(cur.raw - prev.raw);
    prev = cur;
    if (std::isfinite(cur.raw) && change <= opts.rel_tol * std::abs(cur.raw)) break;
  }
  if (!std::isfinite(cur.raw) || cur.capped_twice - cur.capped > opts.divergence_atol) {
    return ExtendedReal::pos_inf();
  }
  return ExtendedReal::finite(cur.raw);
}

}  // namespace

ExtendedReal choquet_positive(const Law& law, const UtilityFunction& u, const DistortionFunction& w,
                              const ChoquetOptions& opts) {
  if (law.is_discrete()) return choquet_discrete(law, u, w);
  return choquet_quantile(law, u, w, opts);
}

CptValue cpt_value(const Law& law, const CptPreferences& prefs, const ChoquetOptions& opts) {
  const ExtendedReal plus = choquet_positive(law.positive_part(), prefs.u_plus, prefs.w_plus, opts);
  if (!plus.is_finite()) {
    throw ComputationError("cpt_value: gains part diverges (utility on gains is unbounded for this law)");
  }
  CptValue v;
  v.v_plus = plus.value();
  v.v_minus = choquet_positive(law.negative_part(), prefs.u_minus, prefs.w_minus, opts);
  v.total = ExtendedReal::finite(v.v_plus) - v.v_minus;
  return v;
}

std::string to_string(const CptValue& v) {
  return fmt::format("v_plus={} v_minus={} total={}", v.v_plus, v.v_minus.to_string(), v.total.to_string());
}

}  // namespace cptq
