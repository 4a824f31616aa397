#pragma once

// Numerical checks of the growth conditions that decide whether the optimal
// portfolio problem can be attained, and the inequalities behind them.
//
// Limits cannot be decided from finitely many probes; every check states its
// decision rule in the verdict and keeps the probe values that produced it.

#include <functional>
#include <string>
#include <vector>

#include "cptq/choquet.hpp"
#include "cptq/extended_real.hpp"
#include "cptq/functions.hpp"
#include "cptq/verdict.hpp"

namespace cptq {

struct LiminfOptions {
  int decades = 12;  ///< probes at x = 10^-j, j = 1..decades
  int fit_points = 6;
  double slope_tol = 0.05;
};

/// liminf_{x -> 0+} w(x) u(1/x) > 0, decided from the log-log trend of the product.
ConditionVerdict liminf_condition(const DistortionFunction& w_minus, const UtilityFunction& u_minus,
                                  const LiminfOptions& opts = {});

/// Geometric probe grid shared by the tail checks.
struct TailGrid {
  double x0 = 1.0;
  double ratio = 2.0;
  int max_steps = 40;
  double cap = 1e12;
  int min_points = 8;
};

struct ExistsXiOptions {
  std::vector<double> ladder = {1.1, 1.25, 1.5, 2.0, 4.0};
  double threshold = 1e3;
  TailGrid grid;
};

/// Searches varsigma > 1 with z(x) - delta z(varsigma x) -> +inf, z = log u(e^x).
ConditionVerdict check_existsxi(const UtilityFunction& u_minus, double delta, const ExistsXiOptions& opts = {});

/// The same property read as [u(x^xi)]^delta / u(x) -> 0, tested on the log of the ratio.
ConditionVerdict existsxi_ratio_test(const UtilityFunction& u_minus, double delta, const ExistsXiOptions& opts = {});

/// Classifies delta against the threshold 1 and attaches the growth-condition verdict.
ConditionVerdict check_delta_threshold(const UtilityFunction& u_minus, double delta);

struct ElasticityEstimate {
  ExtendedReal value;
  std::vector<Probe> evidence;  ///< (x, x f'(x) / f(x)) over the tail window
};

struct ElasticityOptions {
  TailGrid grid;
  int window = 8;
  double rel_step = 1e-4;
};

/// limsup x f'(x) / f(x) estimated by central differences, max over the tail window.
ElasticityEstimate asymptotic_elasticity(const std::function<double(double)>& f, const ElasticityOptions& opts = {});
ElasticityEstimate asymptotic_elasticity(const ZTransform& z, const ElasticityOptions& opts = {});

/// z(lambda x) <= lambda^gamma z(x) for lambda in [1, 1e4] and x in [x_lower, 1e6 x_lower].
ConditionVerdict check_ae_growth(const ZTransform& z, double gamma, double x_lower);

/// Optional probe of u(x) <= c1 x^gamma + c2 on the tail grid.
ConditionVerdict growth_cap_probe(const UtilityFunction& u, double gamma, double c1, double c2);

/// G(lambda) = inf{L >= 1 : u(x^zeta) < [lambda u(x)]^(1/delta) for all x >= L}.
class GFunction {
 public:
  GFunction(UtilityFunction u_normalized, double delta, double zeta);

  double operator()(double lambda) const;

  [[nodiscard]] double delta() const { return delta_; }
  [[nodiscard]] double zeta() const { return zeta_; }
  [[nodiscard]] const UtilityFunction& utility() const { return u_; }

  static constexpr double kProbeLimit = 1e9;

 private:
  UtilityFunction u_;
  double delta_;
  double zeta_;
};

GFunction g_function(const UtilityFunction& u_normalized, double delta, double zeta);
double g_eval(const GFunction& g, double lambda);

/// Strictly increasing f with f(0) = 0 and f(inf) = inf, with its inverse.
struct MonotoneMap {
  std::function<double(double)> forward;
  std::function<double(double)> inverse;
  std::string name;

  static MonotoneMap identity();
  static MonotoneMap power(double s);
  static MonotoneMap utility(const UtilityFunction& u);
};

struct InequalitySides {
  double lhs = 0.0;
  double rhs = 0.0;

  [[nodiscard]] bool holds(double rel_slack = 1e-12) const { return lhs <= rhs + rel_slack * std::abs(rhs); }
};

/// w(P{f(X) > t}) against V(X) / u(f^-1(t)), V the Choquet integral of u(X) under w.
InequalitySides tail_bound_wpfx(const Law& x, const UtilityFunction& u_minus, const DistortionFunction& w_minus,
                                const MonotoneMap& f, double t);

/// P{X^s > t} against 1 / u^-1([u(t^(1/s)) / V_delta]^(1/delta)).
InequalitySides tail_bound_pxs(const Law& x, const UtilityFunction& u_normalized, double delta, double s, double t);

/// E[X^eta] against C + G(1/V_delta)^eta / u^-1(V_delta^(-1/delta)), C = 1 + eta / (zeta - eta).
InequalitySides moment_bound_exeta(const Law& x, const UtilityFunction& u_normalized, double delta, double eta,
                                   double zeta, const GFunction& g);

/// V_delta(X): Choquet integral of u(X) under the distortion associated with u.
double v_delta(const Law& x, const UtilityFunction& u_normalized, double delta);

/// E[X^eta] for X >= 0.
ExtendedReal law_moment(const Law& x, double eta);

}  // namespace cptq
