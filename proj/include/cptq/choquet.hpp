#pragma once

// CPT value functional: V(X) = V+(X+) - V-(X-) where each side is the Choquet
// integral  int_0^inf w(P{u(Y) > y}) dy  of a non-negative payoff Y.

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cptq/extended_real.hpp"
#include "cptq/functions.hpp"

namespace cptq {

struct Atom {
  double value = 0.0;
  double prob = 0.0;
};

/// Law of a scalar payoff: finitely many atoms, or a quantile function on (0, 1).
class Law {
 public:
  using QuantileFn = std::function<double(double)>;

  /// Atoms are sorted by value; probabilities must be positive and sum to 1 within 1e-12.
  static Law discrete(std::vector<Atom> atoms);
  /// Point mass.
  static Law constant(double value);
  static Law quantile(QuantileFn q, std::string description = "quantile law");

  [[nodiscard]] bool is_discrete() const { return !quantile_; }
  /// Sorted ascending by value. Empty for quantile laws.
  [[nodiscard]] std::span<const Atom> atoms() const { return atoms_; }
  /// Generalized inverse of the CDF; defined for both representations.
  [[nodiscard]] double quantile_at(double p) const;

  /// Law of max(X, 0).
  [[nodiscard]] Law positive_part() const;
  /// Law of max(-X, 0).
  [[nodiscard]] Law negative_part() const;
  /// Law of c X for c > 0.
  [[nodiscard]] Law scaled(double c) const;

  [[nodiscard]] std::string describe() const;

 private:
  Law() = default;

  std::vector<Atom> atoms_;
  std::shared_ptr<const QuantileFn> quantile_;
  std::string description_;
};

/// Discrete law from `value,prob` CSV.
Law parse_discrete_law(std::istream& in);
Law load_discrete_law(const std::string& path);
void write_discrete_law(std::ostream& out, const Law& law);

struct CptPreferences {
  UtilityFunction u_plus;
  UtilityFunction u_minus;
  DistortionFunction w_plus;
  DistortionFunction w_minus;
};

struct CptValue {
  double v_plus = 0.0;
  ExtendedReal v_minus = ExtendedReal::finite(0.0);
  /// v_plus - v_minus; -inf exactly when v_minus is +inf.
  ExtendedReal total = ExtendedReal::finite(0.0);
};

/// Quadrature policy for quantile-represented laws.
struct ChoquetOptions {
  int min_level = 10;  ///< grid of 2^level cells
  int max_level = 22;
  double rel_tol = 1e-8;
  double y_max = 1e12;  ///< truncation level for the divergence test
  double divergence_atol = 1e-6;
};

/// P{X > t}.
double survival(const Law& law, double t);

/// int_0^inf w(P{u(X) > y}) dy for X >= 0. Exact for discrete laws; for
/// quantile laws a Riemann-Stieltjes sum of u(q(1-s)) dw(s) on a refined grid.
ExtendedReal choquet_positive(const Law& law, const UtilityFunction& u, const DistortionFunction& w,
                              const ChoquetOptions& opts = {});

CptValue cpt_value(const Law& law, const CptPreferences& prefs, const ChoquetOptions& opts = {});

std::string to_string(const CptValue& v);

}  // namespace cptq
