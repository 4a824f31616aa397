#include "cptq/quadrature.hpp"

#include <cmath>
#include <cstddef>

namespace cptq {

namespace {

struct EndFit {
  double integral = 0.0;
  double exponent = 0.0;
  bool divergent = false;
};

// Integral over [0, h] of the end cell, given f at distances h/2 and 3h/2 from the end.
EndFit fit_end(double near, double far, double h) {
  EndFit fit;
  fit.integral = near * h;
  if (!std::isfinite(near)) {
    fit.divergent = true;
    return fit;
  }
  if (near == 0.0 || far == 0.0 || (near > 0.0) != (far > 0.0) || std::abs(near) <= std::abs(far)) return fit;
  const double a = std::log(near / far) / std::log(3.0);
  fit.exponent = a;
  if (a >= 1.0) {
    fit.divergent = true;
    return fit;
  }
  // f(d) = near * (d / (h/2))^-a integrated over d in [0, h].
  fit.integral = near * std::pow(0.5, a) * h / (1.0 - a);
  return fit;
}

UnitIntegral estimate(const std::function<double(double)>& f, int level) {
  const std::size_t n = std::size_t{1} << level;
  const double h = 1.0 / static_cast<double>(n);
  double interior = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) interior += f((static_cast<double>(j) + 0.5) * h);
  const double l0 = f(0.5 * h);
  const double l1 = f(1.5 * h);
  const double r0 = f(1.0 - 0.5 * h);
  const double r1 = f(1.0 - 1.5 * h);
  const EndFit left = fit_end(l0, l1, h);
  const EndFit right = fit_end(r0, r1, h);
  UnitIntegral out;
  out.level = level;
  out.left_exponent = left.exponent;
  out.right_exponent = right.exponent;
  out.divergent = left.divergent || right.divergent || !std::isfinite(interior);
  out.value = out.divergent ? INFINITY : interior * h + left.integral + right.integral;
  return out;
}

}  // namespace

UnitIntegral integrate_unit_interval(const std::function<double(double)>& f, const UnitIntegralOptions& opts) {
  UnitIntegral prev = estimate(f, opts.min_level);
  if (prev.divergent) return prev;
  for (int level = opts.min_level + 1; level <= opts.max_level; ++level) {
    UnitIntegral cur = estimate(f, level);
    if (cur.divergent) return cur;
    if (std::abs(cur.value - prev.value) <= opts.rel_tol * std::abs(cur.value) + opts.abs_tol) {
      cur.converged = true;
      return cur;
    }
    prev = cur;
  }
  return prev;
}

}  // namespace cptq
