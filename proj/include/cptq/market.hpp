#pragma once

// Pricing kernels rho = dQ/dP described through their law under P, and the
// cost functional of payoffs arranged anti-comonotonically with rho.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "cptq/choquet.hpp"
#include "cptq/extended_real.hpp"
#include "cptq/verdict.hpp"

namespace cptq {

class PricingKernel {
 public:
  enum class Model {
    lognormal,       ///< log rho ~ N(-sigma^2/2, sigma^2)
    quantile_table,  ///< piecewise-linear q_rho through (p, q) knots covering [0, 1]
    discrete,        ///< finitely many states; test fixtures and small lattices
  };

  static PricingKernel lognormal(double sigma);
  /// Knots must start at p = 0 and end at p = 1 with q non-decreasing and q > 0 on (0, 1].
  static PricingKernel quantile_table(std::vector<double> p, std::vector<double> q);
  static PricingKernel discrete(std::vector<double> values, std::vector<double> probs);

  [[nodiscard]] Model model() const { return model_; }
  [[nodiscard]] double sigma() const { return sigma_; }
  [[nodiscard]] double mu() const { return -0.5 * sigma_ * sigma_; }

  /// q_rho(p), p in (0, 1).
  [[nodiscard]] double quantile(double p) const;
  /// q_rho(1 - a) without cancellation in 1 - a.
  [[nodiscard]] double upper_quantile(double a) const;
  /// P{rho <= x}.
  [[nodiscard]] double cdf(double x) const;
  /// int_0^p q_rho.
  [[nodiscard]] double lower_partial(double p) const;
  /// int_{1-s}^1 q_rho, accurate for tiny s.
  [[nodiscard]] double upper_partial(double s) const;
  [[nodiscard]] double mean() const { return upper_partial(1.0); }
  /// ess sup rho; +inf for the lognormal model.
  [[nodiscard]] double sup() const;

  /// Atoms of rho for the discrete model.
  [[nodiscard]] const std::vector<Atom>& states() const { return states_; }
  [[nodiscard]] bool has_continuous_cdf() const;

  [[nodiscard]] std::string describe() const;

 private:
  explicit PricingKernel(Model m) : model_(m) {}

  Model model_;
  double sigma_ = 0.0;
  std::vector<double> knot_p_;
  std::vector<double> knot_q_;
  std::vector<double> knot_cum_;  ///< int_0^{p_i} q
  std::vector<Atom> states_;
  std::vector<double> state_cum_;  ///< P{rho <= state_i}
};

/// Quantile table from `p,q` CSV.
PricingKernel load_kernel_table(std::istream& in);
PricingKernel load_kernel_table(const std::filesystem::path& path);

double kernel_quantile(const PricingKernel& k, double p);

struct MomentProbe {
  double order = 0.0;
  ExtendedReal positive;  ///< E[rho^p]
  ExtendedReal negative;  ///< E[rho^-p]
};

struct AssumptionReport {
  ConditionVerdict continuous_cdf;
  ConditionVerdict esssup_infinite;
  ConditionVerdict moments_finite;
  std::vector<MomentProbe> moments;

  [[nodiscard]] bool all_hold() const;
};

struct AssumptionProbes {
  std::vector<double> moment_orders = {1, 2, 4, 8, 16};
  int tail_levels = 12;  ///< esssup probes at p = 1 - 10^-j
  int grid_level = 12;   ///< grid of 2^level cells for flat-spot detection in tables
};

AssumptionReport check_assumptions(const PricingKernel& k, const AssumptionProbes& probes = {});

/// E_P[rho^order] by quadrature of q_rho^order (exact sum for discrete kernels).
ExtendedReal kernel_moment(const PricingKernel& k, double order);

/// int_0^1 q_rho(x) q_X(1 - x) dx: the price of X arranged anti-comonotonically with rho.
/// A divergent loss side throws InfeasibleError; a divergent gain side returns +inf.
ExtendedReal budget(const PricingKernel& k, const Law& x);

struct PairingBounds {
  ExtendedReal lower;  ///< anti-comonotone pairing
  ExtendedReal upper;  ///< comonotone pairing
};

PairingBounds hardy_littlewood_check(const PricingKernel& k, const Law& x);

}  // namespace cptq
