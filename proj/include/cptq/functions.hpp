#pragma once

// Utility and probability-distortion catalog.
//
// Utilities are strictly increasing maps u: [0, inf) -> [0, inf) with u(0) = 0.
// Besides plain evaluation every utility can report log u(e^t) without leaving
// log space, which is what the growth and elasticity checks work with: the
// interesting behaviour lives at arguments like e^(10^6) that do not exist as
// doubles.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cptq/extended_real.hpp"

namespace cptq {

/// Monotone two-column table (x, value) as read from CSV.
struct FunctionTable {
  enum class Coords {
    linear,  ///< columns are x and value; piecewise-linear interpolation
    loglog,  ///< columns are log x and log value; interpolation in log-log space
  };

  std::vector<double> x;
  std::vector<double> value;
  Coords coords = Coords::linear;
  /// From the `# saturation=` header line; absent for distortion tables.
  std::optional<ExtendedReal> saturation;
};

/// Parses the `x,value` CSV format with optional `# saturation=<v|inf>` and
/// `# coords=<linear|loglog>` metadata lines. Validates strict monotonicity.
FunctionTable parse_function_table(std::istream& in);
FunctionTable load_function_table(const std::filesystem::path& path);

class UtilityFunction {
 public:
  enum class Kind { power, exponential, logarithmic, loglog, prelec, table };

  /// x^alpha for alpha > 0, 1 - (1+x)^alpha for alpha < 0.
  static UtilityFunction power(double alpha);
  /// 1 - exp(-alpha x).
  static UtilityFunction exponential(double alpha);
  /// log(1 + x).
  static UtilityFunction logarithmic();
  /// log(1 + log(1 + x)).
  static UtilityFunction loglog();
  /// exp(alpha sgn(x - 1) |log x|^varpi), with value 0 at x = 0 and 1 at x = 1.
  static UtilityFunction prelec(double alpha, double varpi);
  static UtilityFunction table(FunctionTable table);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double varpi() const { return varpi_; }
  /// Multiplier applied to the argument: this object evaluates u_base(scale * x).
  [[nodiscard]] double argument_scale() const { return scale_; }
  [[nodiscard]] UtilityFunction with_argument_scale(double scale) const;

  /// u(+inf).
  [[nodiscard]] ExtendedReal saturation() const;
  [[nodiscard]] bool bounded() const { return saturation().is_finite(); }

  double operator()(double x) const;
  /// log u(e^t), evaluated without forming e^t where the closed form allows.
  [[nodiscard]] double log_at_log(double t) const;
  /// Largest log x backed by data: the last knot of a table, +inf for closed forms.
  /// Tail checks stop probing there instead of trusting the extrapolation rule.
  [[nodiscard]] double log_data_limit() const;
  /// x with u(x) = y. Throws DomainError for y < 0, SaturationError for y >= u(+inf).
  [[nodiscard]] double inverse(double y) const;

  [[nodiscard]] std::string describe() const;

 private:
  struct TableData;

  UtilityFunction(Kind kind, double alpha, double varpi) : kind_(kind), alpha_(alpha), varpi_(varpi) {}

  double base_eval(double x) const;
  double base_log_at_log(double t) const;
  double base_inverse(double y) const;
  double bisect_inverse(double y) const;

  Kind kind_;
  double alpha_ = 0.0;
  double varpi_ = 0.0;
  double scale_ = 1.0;
  std::shared_ptr<const TableData> table_;
};

class DistortionFunction {
 public:
  enum class Kind { identity, power, prelec, associated, table };

  static DistortionFunction identity();
  /// p^beta.
  static DistortionFunction power(double beta);
  /// exp(-beta (-log p)^varpi) on (0, 1], 0 at p = 0.
  static DistortionFunction prelec(double beta, double varpi);
  static DistortionFunction table(FunctionTable table);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] double varpi() const { return varpi_; }
  /// Parameter of an associated distortion.
  [[nodiscard]] double delta() const { return delta_; }

  double operator()(double p) const;
  /// log w(p); -inf at p = 0.
  [[nodiscard]] double log_value(double p) const;

  [[nodiscard]] std::string describe() const;

 private:
  friend DistortionFunction associated_distortion(const UtilityFunction& u_minus, double delta);
  struct TableData;

  DistortionFunction(Kind kind, double beta, double varpi) : kind_(kind), beta_(beta), varpi_(varpi) {}

  Kind kind_;
  double beta_ = 0.0;
  double varpi_ = 0.0;
  double delta_ = 0.0;
  double log_u_one_ = 0.0;
  std::shared_ptr<const UtilityFunction> base_;
  std::shared_ptr<const TableData> table_;
};

/// z(x) = log u(e^x).
class ZTransform {
 public:
  explicit ZTransform(UtilityFunction base) : base_(std::move(base)) {}

  double operator()(double x) const;
  [[nodiscard]] const UtilityFunction& base() const { return base_; }

 private:
  UtilityFunction base_;
};

struct NormalizedUtility {
  UtilityFunction utility;  ///< u(x * scale), equal to 1 at x = 1
  double scale = 1.0;
};

/// Relative accuracy of bisection inversion.
inline constexpr double kInverseTolerance = 1e-10;

double eval_utility(const UtilityFunction& u, double x);
double inverse_utility(const UtilityFunction& u, double y);
/// Rescales the argument so that u(1) = 1. Requires u(+inf) > 1.
NormalizedUtility normalize_utility(const UtilityFunction& u_minus);
/// w(p) = u(1)^delta u(1/p)^-delta on (0, 1], 0 at p = 0. Requires u(+inf) = +inf.
DistortionFunction associated_distortion(const UtilityFunction& u_minus, double delta);
ZTransform z_transform(const UtilityFunction& u);

/// log(1 + e^t) without overflow.
double softplus(double t);

}  // namespace cptq
