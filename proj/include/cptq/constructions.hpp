#pragma once

// Explicit payoff sequence Z_n = X_n - Y_n that drives the CPT value to u+(+inf)
// at a fixed initial capital whenever liminf w-(x) u-(1/x) = 0:
//
//   A_n = {rho <= b_n},  P(A_n^c) = a_n,  w-(a_n) u-(1/a_n) < 1/n,
//   X_n = b_n / (2 Q(A_n))             on A_n,
//   Y_n = (b_n - 2 x0) / (2 Q(A_n^c))  on A_n^c,
//
// so that E_Q[Z_n] = x0 exactly.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cptq/choquet.hpp"
#include "cptq/market.hpp"
#include "cptq/verdict.hpp"

namespace cptq {

struct Level {
  double a = 1.0;  ///< P(A^c)
  double b = 0.0;  ///< q_rho(1 - a)
};

/// Next level after `previous`: walks a = previous.a / 2^k until w(a) u(1/a) < 1/n, then
/// bisects in log a back towards the crossing (largest admissible a on that stretch).
Level find_level(int n, const PricingKernel& k, const DistortionFunction& w_minus, const UtilityFunction& u_minus,
                 const Level& previous = Level{});

struct SequenceElement {
  int n = 0;
  double a = 0.0;          ///< P(A_n^c) actually realized
  double a_requested = 0.0;
  bool a_adjusted = false;  ///< kernel atoms forced a != a_requested
  double b = 0.0;
  double q_a = 0.0;       ///< Q(A_n)
  double q_a_comp = 0.0;  ///< Q(A_n^c)
  double x_atom = 0.0;
  double y_atom = 0.0;
  Law law = Law::constant(0.0);
  CptValue cpt;
  double cost = 0.0;
};

/// Requires b > 2 x0. With atoms in the kernel law, A = {rho <= b} realizes the nearest
/// achievable a = P{rho > b} instead, and the element is flagged.
SequenceElement build_element(int n, const PricingKernel& k, const CptPreferences& prefs, double x0,
                              const Level& level);

struct NonattainabilityConfig {
  PricingKernel kernel = PricingKernel::lognormal(0.2);
  CptPreferences prefs{UtilityFunction::exponential(1.0), UtilityFunction::logarithmic(),
                       DistortionFunction::prelec(1.0, 0.5), DistortionFunction::prelec(1.0, 0.5)};
  double x0 = 1.0;
  int n_max = 32;
  double gap_tol = 0.05;
};

struct NonattainabilityReport {
  ConditionVerdict liminf;
  double saturation = 0.0;  ///< M = u+(+inf)
  double x0 = 0.0;
  int n0 = 0;               ///< first n with b_n > 2 x0
  std::vector<SequenceElement> elements;  ///< n = n0 .. n_max
  double final_gap = 0.0;
  bool gap_closed = false;   ///< M - V(Z_{n_max}) < gap_tol
  bool all_feasible = false;
  bool value_monotone = false;
  int adjusted_levels = 0;
  std::string conclusion;
};

/// Refuses (ConstructionError) when the liminf condition is verified to hold.
NonattainabilityReport demonstrate_nonattainability(const NonattainabilityConfig& config);

/// Columns n,a_n,b_n,V_plus,V_minus,V,gap.
void write_report_csv(std::ostream& out, const NonattainabilityReport& report);
/// V(Z_n) against n with the asymptote M.
void write_report_svg(std::ostream& out, const NonattainabilityReport& report, const std::string& header_comment = "");

}  // namespace cptq
