#pragma once

// Discretized quantile formulation: the payoff is the equal-mass law of a
// non-decreasing profile q_1 <= ... <= q_N, placed anti-comonotonically against
// the pricing kernel (q_1 sits on the most expensive cell of rho).
//
// With equal masses the CPT value is separable,
//   V(q) = sum_i pi+_i u+(q_i+) - pi-_i u-(q_i-),
//   pi+_i = w+((N-i+1)/N) - w+((N-i)/N),   pi-_i = w-(i/N) - w-((i-1)/N),
// and the cost is sum_i kappa_i q_i with kappa_i the kernel mass of cell N+1-i.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "cptq/attainability.hpp"
#include "cptq/choquet.hpp"
#include "cptq/market.hpp"

namespace cptq {

struct QuantilePortfolio {
  std::vector<double> grid;  ///< p_i = (i - 1/2) / N
  std::vector<double> q;     ///< non-decreasing
  CptValue cpt;
  double cost = 0.0;

  [[nodiscard]] std::size_t size() const { return q.size(); }
  /// Equal-mass discrete law of the profile.
  [[nodiscard]] Law law() const;
};

struct SolveOptions {
  int n = 512;
  int restarts = 16;  ///< random monotone starts, on top of the constant start
  bool dp_warm_start = true;  ///< Lagrangian dynamic program on a value lattice
  int dp_levels = 200;
  int max_iterations = 10000;
  int stall_window = 50;
  double stall_rel_tol = 1e-8;
  double lower_bound = -std::numeric_limits<double>::infinity();
  double upper_bound = std::numeric_limits<double>::infinity();
  double eta = 1.2;  ///< moment order of the loss diagnostic
  /// Existence regime: w- >= w_delta on a grid, the growth condition on u- and the
  /// kernel assumptions must all be verified.
  bool enforce_existence = true;
  double delta = 0.5;
  std::uint64_t seed = 1;
  int snapshot_every = 25;  ///< accepted steps between stored iterates
};

struct SolveDiagnostics {
  int iterates = 0;  ///< accepted steps of the returned start
  std::vector<double> value_trace;
  std::vector<double> neg_moment_trace;  ///< E[(X-)^eta] per accepted iterate
  std::vector<std::vector<double>> snapshots;  ///< thinned iterates, last one is the result
  int restarts = 0;
  int best_start = 0;  ///< 0 constant, 1..restarts random, restarts + 1 lattice warm start
  bool converged = false;
  std::vector<double> start_values;
};

struct SolveResult {
  QuantilePortfolio portfolio;
  SolveDiagnostics diagnostics;
};

/// Precomputed weights of the separable objective.
class DiscreteProblem {
 public:
  DiscreteProblem(const PricingKernel& k, const CptPreferences& prefs, double x0, int n);

  [[nodiscard]] int size() const { return static_cast<int>(kappa_.size()); }
  [[nodiscard]] double x0() const { return x0_; }
  [[nodiscard]] const std::vector<double>& kappa() const { return kappa_; }
  [[nodiscard]] const std::vector<double>& pi_plus() const { return pi_plus_; }
  [[nodiscard]] const std::vector<double>& pi_minus() const { return pi_minus_; }

  [[nodiscard]] double cell_value(int i, double x) const;
  [[nodiscard]] double cell_derivative(int i, double x) const;
  [[nodiscard]] double cell_curvature(int i, double x) const;
  [[nodiscard]] double value(const std::vector<double>& q) const;
  [[nodiscard]] double cost(const std::vector<double>& q) const;

 private:
  CptPreferences prefs_;
  double x0_;
  std::vector<double> kappa_;
  std::vector<double> pi_plus_;
  std::vector<double> pi_minus_;
};

/// Closest point to y in the norm sum_i M_i (q_i - y_i)^2 among non-decreasing profiles
/// inside [lo, hi] with cost <= x0. An empty metric means M = kappa.
/// Throws InfeasibleError when the set is empty.
std::vector<double> project_budget(const std::vector<double>& y, const std::vector<double>& kappa, double x0,
                                   double lo, double hi, const std::vector<double>& metric = {});

/// Weighted isotonic regression (pool adjacent violators).
std::vector<double> isotonic_regression(const std::vector<double>& y, const std::vector<double>& weights);

SolveResult solve(const PricingKernel& k, const CptPreferences& prefs, double x0, const SolveOptions& opts = {});

/// CPT value and cost of the profile, through the general Choquet and budget routines.
std::pair<CptValue, double> value_and_cost(const QuantilePortfolio& portfolio, const PricingKernel& k,
                                           const CptPreferences& prefs);

struct TightnessReport {
  int checked = 0;
  int violations = 0;
  int unevaluated = 0;
  double max_neg_moment = 0.0;
  double min_margin = std::numeric_limits<double>::infinity();  ///< min over iterates of rhs - lhs
  std::vector<InequalitySides> sides;
};

/// Checks the moment bound on E[(X-)^eta] for every stored iterate.
TightnessReport tightness_report(const SolveDiagnostics& diag, const UtilityFunction& u_normalized, double delta,
                                 double eta, double zeta, const GFunction& g);

/// Columns p,q.
void write_portfolio_csv(std::ostream& out, const QuantilePortfolio& portfolio);
/// Columns iteration,value,neg_moment.
void write_diagnostics_csv(std::ostream& out, const SolveDiagnostics& diag);

}  // namespace cptq
