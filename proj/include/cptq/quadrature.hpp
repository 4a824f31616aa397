#pragma once

#include <functional>

namespace cptq {

struct UnitIntegralOptions {
  int min_level = 10;  ///< midpoint grid of 2^level cells
  int max_level = 22;
  double rel_tol = 1e-6;
  double abs_tol = 1e-14;
};

struct UnitIntegral {
  double value = 0.0;
  bool divergent = false;
  bool converged = false;
  int level = 0;
  /// Fitted power of the endpoint singularity f ~ c d^-a (0 when the end is tame).
  double left_exponent = 0.0;
  double right_exponent = 0.0;
};

/// int_0^1 f(x) dx for f of one sign near each endpoint. Interior cells use the
/// midpoint rule; the two end cells are replaced by the integral of a power law
/// fitted through the two nearest midpoints, and a fitted exponent >= 1 marks
/// the integral divergent.
UnitIntegral integrate_unit_interval(const std::function<double(double)>& f, const UnitIntegralOptions& opts = {});

}  // namespace cptq
