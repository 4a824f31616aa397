#pragma once

#include <compare>
#include <string>

namespace cptq {

/// A real number or one of the two infinities, carried as an explicit tag so
/// comparisons against saturation levels never depend on a sentinel float.
class ExtendedReal {
 public:
  enum class Kind { finite, pos_inf, neg_inf };

  constexpr ExtendedReal() = default;

  static constexpr ExtendedReal finite(double v) { return ExtendedReal(Kind::finite, v); }
  static constexpr ExtendedReal pos_inf() { return ExtendedReal(Kind::pos_inf, 0.0); }
  static constexpr ExtendedReal neg_inf() { return ExtendedReal(Kind::neg_inf, 0.0); }

  /// Maps IEEE infinities onto the tagged infinities. NaN is rejected.
  static ExtendedReal from_double(double v);

  [[nodiscard]] constexpr Kind kind() const { return kind_; }
  [[nodiscard]] constexpr bool is_finite() const { return kind_ == Kind::finite; }
  [[nodiscard]] constexpr bool is_pos_inf() const { return kind_ == Kind::pos_inf; }
  [[nodiscard]] constexpr bool is_neg_inf() const { return kind_ == Kind::neg_inf; }

  /// Finite value; throws for infinities.
  [[nodiscard]] double value() const;
  /// IEEE view (+-infinity for the infinite tags).
  [[nodiscard]] double to_double() const;

  /// "inf", "-inf" or the shortest round-trip decimal.
  [[nodiscard]] std::string to_string() const;
  static ExtendedReal parse(const std::string& text);

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b);
  friend std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b);
  friend bool operator==(const ExtendedReal& a, double b) { return a == ExtendedReal::from_double(b); }
  friend std::partial_ordering operator<=>(const ExtendedReal& a, double b) {
    return a <=> ExtendedReal::from_double(b);
  }

  friend ExtendedReal operator-(const ExtendedReal& a);
  /// Sum of extended reals; +inf + -inf is undefined and throws.
  friend ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b);
  friend ExtendedReal operator-(const ExtendedReal& a, const ExtendedReal& b) { return a + (-b); }

 private:
  constexpr ExtendedReal(Kind k, double v) : kind_(k), value_(v) {}

  Kind kind_ = Kind::finite;
  double value_ = 0.0;
};

}  // namespace cptq
