#include "cptq/extended_real.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cptq/errors.hpp"

namespace cptq {

ExtendedReal ExtendedReal::from_double(double v) {
  if (std::isnan(v)) throw DomainError("ExtendedReal: NaN is not an extended real");
  if (std::isinf(v)) return v > 0 ? pos_inf() : neg_inf();
  return finite(v);
}

double ExtendedReal::value() const {
  if (!is_finite()) throw DomainError("ExtendedReal::value on an infinite value");
  return value_;
}

double ExtendedReal::to_double() const {
  switch (kind_) {
    case Kind::pos_inf:
      return std::numeric_limits<double>::infinity();
    case Kind::neg_inf:
      return -std::numeric_limits<double>::infinity();
    case Kind::finite:
      break;
  }
  return value_;
}

std::string ExtendedReal::to_string() const {
  switch (kind_) {
    case Kind::pos_inf:
      return "inf";
    case Kind::neg_inf:
      return "-inf";
    case Kind::finite:
      break;
  }
  return fmt::format("{}", value_);
}

ExtendedReal ExtendedReal::parse(const std::string& text) {
  if (text == "inf" || text == "+inf") return pos_inf();
  if (text == "-inf") return neg_inf();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParameterError("cannot parse extended real from '" + text + "'");
  }
  if (used != text.size()) throw ParameterError("trailing characters in extended real '" + text + "'");
  return from_double(v);
}

bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.kind_ != b.kind_) return false;
  return !a.is_finite() || a.value_ == b.value_;
}

std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
  return a.to_double() <=> b.to_double();
}

ExtendedReal operator-(const ExtendedReal& a) {
  switch (a.kind_) {
    case ExtendedReal::Kind::pos_inf:
      return ExtendedReal::neg_inf();
    case ExtendedReal::Kind::neg_inf:
      return ExtendedReal::pos_inf();
    case ExtendedReal::Kind::finite:
      break;
  }
  return ExtendedReal::finite(-a.value_);
}

ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b) {
  if ((a.is_pos_inf() && b.is_neg_inf()) || (a.is_neg_inf() && b.is_pos_inf())) {
    throw DomainError("ExtendedReal: inf - inf is undefined");
  }
  if (a.is_pos_inf() || b.is_pos_inf()) return ExtendedReal::pos_inf();
  if (a.is_neg_inf() || b.is_neg_inf()) return ExtendedReal::neg_inf();
  return ExtendedReal::from_double(a.value_ + b.value_);
}

}  // namespace cptq
