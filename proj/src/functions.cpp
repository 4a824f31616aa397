#include "cptq/functions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "cptq/csv.hpp"
#include "cptq/errors.hpp"

namespace cptq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

// Piecewise-linear interpolation inside [xs.front(), xs.back()], linear
// extrapolation with the end slopes outside.
double interp_extrap(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const std::size_t n = xs.size();
  std::size_t hi = 0;
  if (x <= xs.front()) {
    hi = 1;
  } else if (x >= xs.back()) {
    hi = n - 1;
  } else {
    hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  }
  const std::size_t lo = hi - 1;
  const double slope = (ys[hi] - ys[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + slope * (x - xs[lo]);
}

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

double log_softplus(double t) {
  if (t < -30.0) return t;
  return std::log(softplus(t));
}

}  // namespace

double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

// ---------------------------------------------------------------------------
// Tables

FunctionTable parse_function_table(std::istream& in) {
  const TwoColumnCsv csv = read_two_column_csv(in, "x,value");
  FunctionTable t;
  for (const auto& [x, v] : csv.rows) {
    t.x.push_back(x);
    t.value.push_back(v);
  }
  if (auto it = csv.metadata.find("saturation"); it != csv.metadata.end()) {
    t.saturation = ExtendedReal::parse(it->second);
  }
  if (auto it = csv.metadata.find("coords"); it != csv.metadata.end()) {
    if (it->second == "linear") {
      t.coords = FunctionTable::Coords::linear;
    } else if (it->second == "loglog") {
      t.coords = FunctionTable::Coords::loglog;
    } else {
      throw ParameterError("unknown coords '" + it->second + "' (expected linear or loglog)");
    }
  }
  require(!t.x.empty(), "function table has no rows");
  require(strictly_increasing(t.x), "function table: x column must be strictly increasing");
  require(strictly_increasing(t.value), "function table: value column must be strictly increasing");
  return t;
}

FunctionTable load_function_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open function table " + path.string());
  return parse_function_table(in);
}

struct UtilityFunction::TableData {
  FunctionTable::Coords coords = FunctionTable::Coords::linear;
  std::vector<double> xs;  // x, or log x in loglog coordinates
  std::vector<double> ys;  // u, or log u in loglog coordinates
  ExtendedReal saturation = ExtendedReal::pos_inf();
  double last_slope = 0.0;
};

struct DistortionFunction::TableData {
  std::vector<double> ps;
  std::vector<double> ws;
};

// ---------------------------------------------------------------------------
// UtilityFunction

UtilityFunction UtilityFunction::power(double alpha) {
  require(std::isfinite(alpha) && alpha != 0.0, "power utility: alpha must be finite and non-zero");
  return {Kind::power, alpha, 0.0};
}

UtilityFunction UtilityFunction::exponential(double alpha) {
  require(std::isfinite(alpha) && alpha > 0.0, "exponential utility: alpha must be positive");
  return {Kind::exponential, alpha, 0.0};
}

double UtilityFunction::log_data_limit() const {
  if (kind_ != Kind::table) return std::numeric_limits<double>::infinity();
  const double last = table_->xs.back();
  const double log_last = table_->coords == FunctionTable::Coords::loglog ? last : std::log(last);
  return log_last - std::log(scale_);
}

UtilityFunction UtilityFunction::logarithmic() { return {Kind::logarithmic, 0.0, 0.0}; }

UtilityFunction UtilityFunction::loglog() { return {Kind::loglog, 0.0, 0.0}; }

UtilityFunction UtilityFunction::prelec(double alpha, double varpi) {
  require(std::isfinite(alpha) && alpha > 0.0, "prelec utility: alpha must be positive");
  require(std::isfinite(varpi) && varpi > 0.0, "prelec utility: varpi must be positive");
  return {Kind::prelec, alpha, varpi};
}

UtilityFunction UtilityFunction::table(FunctionTable table) {
  require(table.x.size() == table.value.size() && !table.x.empty(), "utility table: empty or ragged");
  require(strictly_increasing(table.x) && strictly_increasing(table.value),
          "utility table: both columns must be strictly increasing");
  require(table.saturation.has_value(), "utility table: saturation must be declared in the header");
  auto data = std::make_shared<TableData>();
  data->coords = table.coords;
  data->saturation = *table.saturation;
  if (table.coords == FunctionTable::Coords::linear) {
    require(table.x.front() >= 0.0, "utility table: x must be non-negative");
    if (table.x.front() == 0.0) {
      require(table.value.front() == 0.0, "utility table: u(0) must be 0");
    } else {
      require(table.value.front() > 0.0, "utility table: values must be positive for x > 0");
      table.x.insert(table.x.begin(), 0.0);
      table.value.insert(table.value.begin(), 0.0);
    }
    require(table.x.size() >= 2, "utility table: need at least one knot besides the origin");
    if (data->saturation.is_finite()) {
      require(data->saturation.value() > table.value.back(), "utility table: finite saturation must exceed the last value");
    } else {
      require(data->saturation.is_pos_inf(), "utility table: saturation must be positive");
    }
  } else {
    require(data->saturation.is_pos_inf(), "utility table: loglog coordinates require saturation=inf");
    require(table.x.size() >= 2, "utility table: loglog coordinates need at least two knots");
  }
  data->xs = std::move(table.x);
  data->ys = std::move(table.value);
  const std::size_t n = data->xs.size();
  data->last_slope = (data->ys[n - 1] - data->ys[n - 2]) / (data->xs[n - 1] - data->xs[n - 2]);
  UtilityFunction u(Kind::table, 0.0, 0.0);
  u.table_ = std::move(data);
  return u;
}

UtilityFunction UtilityFunction::with_argument_scale(double scale) const {
  require(std::isfinite(scale) && scale > 0.0, "argument scale must be positive");
  UtilityFunction copy = *this;
  copy.scale_ = scale_ * scale;
  return copy;
}

ExtendedReal UtilityFunction::saturation() const {
  switch (kind_) {
    case Kind::power:
      return alpha_ > 0.0 ? ExtendedReal::pos_inf() : ExtendedReal::finite(1.0);
    case Kind::exponential:
      return ExtendedReal::finite(1.0);
    case Kind::logarithmic:
    case Kind::loglog:
    case Kind::prelec:
      return ExtendedReal::pos_inf();
    case Kind::table:
      return table_->saturation;
  }
  return ExtendedReal::pos_inf();
}

double UtilityFunction::operator()(double x) const {
  if (std::isnan(x) || x < 0.0) throw DomainError(fmt::format("utility evaluated at negative argument {}", x));
  return base_eval(scale_ * x);
}

double UtilityFunction::base_eval(double x) const {
  switch (kind_) {
    case Kind::power:
      if (alpha_ > 0.0) return std::pow(x, alpha_);
      return -std::expm1(alpha_ * std::log1p(x));
    case Kind::exponential:
      return -std::expm1(-alpha_ * x);
    case Kind::logarithmic:
      return std::log1p(x);
    case Kind::loglog:
      return std::log1p(std::log1p(x));
    case Kind::prelec: {
      if (x == 0.0) return 0.0;
      const double l = std::log(x);
      return std::exp(alpha_ * sgn(l) * std::pow(std::abs(l), varpi_));
    }
    case Kind::table: {
      const TableData& t = *table_;
      if (t.coords == FunctionTable::Coords::loglog) {
        if (x == 0.0) return 0.0;
        return std::exp(interp_extrap(t.xs, t.ys, std::log(x)));
      }
      if (x <= t.xs.back()) return interp_extrap(t.xs, t.ys, x);
      const double dx = x - t.xs.back();
      if (t.saturation.is_finite()) {
        const double s = t.saturation.value();
        const double gap = s - t.ys.back();
        return s - gap * std::exp(-t.last_slope * dx / gap);
      }
      return t.ys.back() + t.last_slope * dx;
    }
  }
  return 0.0;
}

double UtilityFunction::log_at_log(double t) const {
  if (std::isnan(t)) throw DomainError("log_at_log: NaN argument");
  return base_log_at_log(t + std::log(scale_));
}

double UtilityFunction::base_log_at_log(double t) const {
  switch (kind_) {
    case Kind::power:
      if (alpha_ > 0.0) return alpha_ * t;
      return std::log(-std::expm1(alpha_ * softplus(t)));
    case Kind::exponential:
      if (t < -30.0) return std::log(alpha_) + t;
      return std::log(-std::expm1(-alpha_ * std::exp(t)));
    case Kind::logarithmic:
      return log_softplus(t);
    case Kind::loglog:
      if (t < -30.0) return t;
      return std::log(std::log1p(softplus(t)));
    case Kind::prelec:
      return alpha_ * sgn(t) * std::pow(std::abs(t), varpi_);
    case Kind::table: {
      const TableData& d = *table_;
      if (d.coords == FunctionTable::Coords::loglog) return interp_extrap(d.xs, d.ys, t);
      const double x = std::exp(t);
      // First segment starts at the origin, so u is linear there.
      if (x < d.xs[1]) return std::log(d.ys[1] / d.xs[1]) + t;
      if (x <= d.xs.back()) return std::log(interp_extrap(d.xs, d.ys, x));
      if (d.saturation.is_finite()) {
        const double s = d.saturation.value();
        const double gap = s - d.ys.back();
        if (!std::isfinite(x)) return std::log(s);
        return std::log(s) + std::log1p(-(gap / s) * std::exp(-d.last_slope * (x - d.xs.back()) / gap));
      }
      if (std::isfinite(x)) return std::log(d.ys.back() + d.last_slope * (x - d.xs.back()));
      return std::log(d.last_slope) + t;
    }
  }
  return 0.0;
}

double UtilityFunction::inverse(double y) const {
  if (std::isnan(y) || y < 0.0) throw DomainError(fmt::format("inverse utility at negative level {}", y));
  const ExtendedReal sat = saturation();
  if (sat.is_finite() && y >= sat.value()) {
    throw SaturationError(fmt::format("inverse utility: level {} is not below u(+inf) = {}", y, sat.value()));
  }
  if (y == 0.0) return 0.0;
  return base_inverse(y) / scale_;
}

double UtilityFunction::base_inverse(double y) const {
  switch (kind_) {
    case Kind::power:
      if (alpha_ > 0.0) return std::pow(y, 1.0 / alpha_);
      return std::expm1(std::log1p(-y) / alpha_);
    case Kind::exponential:
      return -std::log1p(-y) / alpha_;
    case Kind::logarithmic:
      return std::expm1(y);
    case Kind::loglog:
      return std::expm1(std::expm1(y));
    case Kind::prelec: {
      const double l = std::log(y);
      return std::exp(sgn(l) * std::pow(std::abs(l) / alpha_, 1.0 / varpi_));
    }
    case Kind::table:
      return bisect_inverse(y);
  }
  return 0.0;
}

double UtilityFunction::bisect_inverse(double y) const {
  double lo = 0.0;
  double hi = 1.0;
  while (base_eval(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return kInf;
  }
  for (int i = 0; i < 2000 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (base_eval(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double x = 0.5 * (lo + hi);
  if (std::abs(base_eval(x) - y) > kInverseTolerance * std::max(y, 1e-300)) {
    throw ComputationError(fmt::format("inverse utility: bisection did not reach tolerance at level {}", y));
  }
  return x;
}

std::string UtilityFunction::describe() const {
  std::string s;
  switch (kind_) {
    case Kind::power:
      s = fmt::format("power(alpha={})", alpha_);
      break;
    case Kind::exponential:
      s = fmt::format("exponential(alpha={})", alpha_);
      break;
    case Kind::logarithmic:
      s = "logarithmic";
      break;
    case Kind::loglog:
      s = "loglog";
      break;
    case Kind::prelec:
      s = fmt::format("prelec_utility(alpha={}, varpi={})", alpha_, varpi_);
      break;
    case Kind::table:
      s = fmt::format("table({} knots, {}, saturation={})", table_->xs.size(),
                      table_->coords == FunctionTable::Coords::loglog ? "loglog" : "linear",
                      table_->saturation.to_string());
      break;
  }
  if (scale_ != 1.0) s += fmt::format(" with argument scale {}", scale_);
  return s;
}

// ---------------------------------------------------------------------------
// DistortionFunction

DistortionFunction DistortionFunction::identity() { return {Kind::identity, 1.0, 0.0}; }

DistortionFunction DistortionFunction::power(double beta) {
  require(std::isfinite(beta) && beta > 0.0, "power distortion: beta must be positive");
  return {Kind::power, beta, 0.0};
}

DistortionFunction DistortionFunction::prelec(double beta, double varpi) {
  require(std::isfinite(beta) && beta > 0.0, "prelec distortion: beta must be positive");
  require(std::isfinite(varpi) && varpi > 0.0, "prelec distortion: varpi must be positive");
  return {Kind::prelec, beta, varpi};
}

DistortionFunction DistortionFunction::table(FunctionTable table) {
  require(table.coords == FunctionTable::Coords::linear, "distortion table: only linear coordinates are supported");
  require(!table.x.empty() && table.x.size() == table.value.size(), "distortion table: empty or ragged");
  require(strictly_increasing(table.x) && strictly_increasing(table.value),
          "distortion table: both columns must be strictly increasing");
  require(table.x.front() >= 0.0 && table.x.back() <= 1.0, "distortion table: x must lie in [0, 1]");
  require(table.value.front() >= 0.0 && table.value.back() <= 1.0, "distortion table: values must lie in [0, 1]");
  if (table.x.front() == 0.0) {
    require(table.value.front() == 0.0, "distortion table: w(0) must be 0");
  } else {
    require(table.value.front() > 0.0, "distortion table: values must be positive for p > 0");
    table.x.insert(table.x.begin(), 0.0);
    table.value.insert(table.value.begin(), 0.0);
  }
  if (table.x.back() == 1.0) {
    require(table.value.back() == 1.0, "distortion table: w(1) must be 1");
  } else {
    require(table.value.back() < 1.0, "distortion table: values must be below 1 for p < 1");
    table.x.push_back(1.0);
    table.value.push_back(1.0);
  }
  auto data = std::make_shared<TableData>();
  data->ps = std::move(table.x);
  data->ws = std::move(table.value);
  DistortionFunction w(Kind::table, 0.0, 0.0);
  w.table_ = std::move(data);
  return w;
}

namespace {

double clamp_probability(double p) {
  constexpr double slack = 1e-12;
  if (std::isnan(p) || p < -slack || p > 1.0 + slack) {
    throw DomainError(fmt::format("distortion evaluated outside [0, 1] at {}", p));
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

double DistortionFunction::operator()(double p) const {
  p = clamp_probability(p);
  switch (kind_) {
    case Kind::identity:
      return p;
    case Kind::power:
      return std::pow(p, beta_);
    case Kind::table:
      return std::clamp(interp_extrap(table_->ps, table_->ws, p), 0.0, 1.0);
    case Kind::prelec:
    case Kind::associated:
      if (p == 0.0) return 0.0;
      return std::exp(log_value(p));
  }
  return 0.0;
}

double DistortionFunction::log_value(double p) const {
  p = clamp_probability(p);
  if (p == 0.0) return -kInf;
  switch (kind_) {
    case Kind::identity:
      return std::log(p);
    case Kind::power:
      return beta_ * std::log(p);
    case Kind::prelec:
      return -beta_ * std::pow(-std::log(p), varpi_);
    case Kind::associated:
      return std::min(0.0, delta_ * (log_u_one_ - base_->log_at_log(-std::log(p))));
    case Kind::table:
      return std::log((*this)(p));
  }
  return 0.0;
}

std::string DistortionFunction::describe() const {
  switch (kind_) {
    case Kind::identity:
      return "identity";
    case Kind::power:
      return fmt::format("power(beta={})", beta_);
    case Kind::prelec:
      return fmt::format("prelec(beta={}, varpi={})", beta_, varpi_);
    case Kind::associated:
      return fmt::format("associated(u={}, delta={})", base_->describe(), delta_);
    case Kind::table:
      return fmt::format("table({} knots)", table_->ps.size());
  }
  return {};
}

// ---------------------------------------------------------------------------

double ZTransform::operator()(double x) const {
  const double z = base_.log_at_log(x);
  if (std::isnan(z) || z == -kInf) {
    throw DomainError(fmt::format("z-transform undefined at {}: u(e^x) is zero", x));
  }
  return z;
}

double eval_utility(const UtilityFunction& u, double x) { return u(x); }

double inverse_utility(const UtilityFunction& u, double y) { return u.inverse(y); }

NormalizedUtility normalize_utility(const UtilityFunction& u_minus) {
  const ExtendedReal sat = u_minus.saturation();
  if (sat.is_finite() && sat.value() <= 1.0) {
    throw ParameterError(fmt::format("normalization impossible: u(+inf) = {} <= 1", sat.value()));
  }
  const double scale = u_minus.inverse(1.0);
  return {u_minus.with_argument_scale(scale), scale};
}

DistortionFunction associated_distortion(const UtilityFunction& u_minus, double delta) {
  if (!(std::isfinite(delta) && delta > 0.0)) throw ParameterError("associated distortion: delta must be positive");
  if (!u_minus.saturation().is_pos_inf()) {
    throw ParameterError("invalid association: u(+inf) is finite, so w_delta(0+) > 0 is not a distortion");
  }
  DistortionFunction w(DistortionFunction::Kind::associated, 0.0, 0.0);
  w.delta_ = delta;
  w.base_ = std::make_shared<const UtilityFunction>(u_minus);
  w.log_u_one_ = u_minus.log_at_log(0.0);
  return w;
}

ZTransform z_transform(const UtilityFunction& u) { return ZTransform(u); }

}  // namespace cptq
