#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cptq/errors.hpp"
#include "cptq/functions.hpp"

using namespace cptq;

namespace {

std::vector<UtilityFunction> catalog() {
  return {UtilityFunction::power(0.5),       UtilityFunction::power(2.0),   UtilityFunction::power(-1.0),
          UtilityFunction::exponential(1.0), UtilityFunction::logarithmic(), UtilityFunction::loglog(),
          UtilityFunction::prelec(1.0, 0.5), UtilityFunction::prelec(2.0, 0.8)};
}

FunctionTable table_from(const std::string& text) {
  std::istringstream in(text);
  return parse_function_table(in);
}

}  // namespace

TEST_CASE("utility evaluation") {
  CHECK(eval_utility(UtilityFunction::exponential(1.0), 0.0) == 0.0);
  const auto p = UtilityFunction::power(-1.0);
  for (double x : {1.0, 10.0, 1e6}) CHECK(p(x) == doctest::Approx(1.0 - 1.0 / (1.0 + x)).epsilon(1e-15));
  CHECK(p.saturation() == 1.0);
  CHECK(eval_utility(UtilityFunction::logarithmic(), std::numbers::e - 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval_utility(UtilityFunction::power(2.0), -1.0), DomainError);
}

TEST_CASE("saturation levels of the catalog") {
  CHECK(UtilityFunction::exponential(2.0).saturation() == 1.0);
  CHECK(UtilityFunction::power(-0.5).bounded());
  for (const auto& u : {UtilityFunction::power(0.3), UtilityFunction::logarithmic(), UtilityFunction::loglog(),
                        UtilityFunction::prelec(1.0, 0.5)}) {
    CHECK(u.saturation().is_pos_inf());
  }
}

TEST_CASE("saturation is the monotone limit on a doubling grid") {
  for (const auto& u : catalog()) {
    double prev = 0.0;
    for (double x = 1.0; x < 1e300; x *= 2.0) {
      const double v = u(x);
      CHECK(v >= prev);
      CHECK(v <= u.saturation().to_double());
      prev = v;
    }
    if (u.bounded()) CHECK(prev == doctest::Approx(u.saturation().value()).epsilon(1e-9));
    if (!u.bounded() && u.kind() != UtilityFunction::Kind::loglog) CHECK(prev > 10.0);
  }
}

TEST_CASE("utility inversion") {
  CHECK(inverse_utility(UtilityFunction::power(2.0), 4.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(inverse_utility(UtilityFunction::exponential(1.0), 1.0), SaturationError);
  CHECK_THROWS_AS(inverse_utility(UtilityFunction::power(2.0), -1.0), DomainError);
  const double expected = std::exp(std::numbers::e - 1.0) - 1.0;
  CHECK(inverse_utility(UtilityFunction::loglog(), 1.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::log1p(std::log1p(expected)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("catalog utilities are strictly increasing and invert their values") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logx(-6.0, 6.0);
  for (const auto& u : catalog()) {
    CAPTURE(u.describe());
    for (int i = 0; i < 200; ++i) {
      double a = std::pow(10.0, logx(rng));
      double b = std::pow(10.0, logx(rng));
      if (a > b) std::swap(a, b);
      if (a == b) continue;
      // bounded utilities hit their saturation in double precision
      if (u(b) < u.saturation().to_double()) {
        CHECK(u(a) < u(b));
      } else {
        CHECK(u(a) <= u(b));
      }
      const double y = u(a);
      if (y < u.saturation().to_double() * (1.0 - 1e-9)) {
        CHECK(std::abs(u(inverse_utility(u, y)) - y) <= kInverseTolerance * y);
      }
    }
  }
}

TEST_CASE("normalization") {
  const auto n = normalize_utility(UtilityFunction::power(1.7));
  CHECK(n.scale == doctest::Approx(1.0).epsilon(1e-14));
  const auto l = normalize_utility(UtilityFunction::logarithmic());
  CHECK(l.scale == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-12));
  CHECK(l.utility(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  const auto t = UtilityFunction::table(table_from("# saturation=inf\nx,value\n0,0\n1,0.25\n2,1\n4,3\n"));
  CHECK(normalize_utility(t).scale == doctest::Approx(2.0).epsilon(1e-10));
  CHECK_THROWS_AS(normalize_utility(UtilityFunction::exponential(1.0)), ParameterError);
}

TEST_CASE("associated distortion of a power utility is a power distortion") {
  for (double alpha : {0.5, 1.0, 2.0}) {
    for (double delta : {0.25, 0.5, 1.0, 1.5}) {
      const auto w = associated_distortion(UtilityFunction::power(alpha), delta);
      const auto ref = DistortionFunction::power(alpha * delta);
      CHECK(w(0.0) == 0.0);
      CHECK(w(1.0) == doctest::Approx(1.0).epsilon(1e-15));
      for (int i = 1; i <= 1000; ++i) {
        const double x = i / 1000.0;
        CHECK(std::abs(w(x) - ref(x)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("associated distortion of the Prelec utility is a Prelec distortion") {
  const double alpha = 1.3;
  const double varpi = 0.6;
  for (double delta : {0.5, 0.9}) {
    const auto w = associated_distortion(UtilityFunction::prelec(alpha, varpi), delta);
    const auto ref = DistortionFunction::prelec(delta * alpha, varpi);
    for (double x = 1e-12; x <= 1.0; x *= 1.7) CHECK(std::abs(w(x) - ref(x)) <= 1e-9);
  }
}

TEST_CASE("associated distortion against normalized utility is exact") {
  for (const auto& base : {UtilityFunction::power(0.7), UtilityFunction::logarithmic(), UtilityFunction::loglog(),
                           UtilityFunction::prelec(1.0, 0.5)}) {
    const auto u = normalize_utility(base).utility;
    for (double delta : {0.5, 1.0, 2.0}) {
      const auto w = associated_distortion(u, delta);
      for (int i = 1; i <= 64; ++i) {
        const double x = i / 64.0;
        CHECK(w(x) * std::pow(u(1.0 / x), delta) == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("associated distortion needs an unbounded utility") {
  CHECK_THROWS_AS(associated_distortion(UtilityFunction::exponential(1.0), 0.5), ParameterError);
}

TEST_CASE("z-transform closed forms") {
  const double alpha = 1.7;
  const double varpi = 0.4;
  const auto z = z_transform(UtilityFunction::prelec(alpha, varpi));
  for (double x : {0.0, 0.5, 1.0, 10.0, 1e3, 1e6}) CHECK(std::abs(z(x) - alpha * std::pow(x, varpi)) <= 1e-12 * std::max(1.0, z(x)));
  const auto zl = z_transform(UtilityFunction::logarithmic());
  for (double x : {0.0, 1.0, 5.0, 30.0}) CHECK(zl(x) == doctest::Approx(std::log(std::log1p(std::exp(x)))).epsilon(1e-13));
  CHECK(zl(1e6) == doctest::Approx(std::log(1e6)).epsilon(1e-12));
  const auto zp = z_transform(UtilityFunction::power(2.5));
  CHECK(zp(3.0) == doctest::Approx(7.5).epsilon(1e-14));
  CHECK(zp(1e5) == doctest::Approx(2.5e5).epsilon(1e-14));
}

TEST_CASE("distortions fix the endpoints and increase") {
  for (const auto& w : {DistortionFunction::identity(), DistortionFunction::power(0.7), DistortionFunction::prelec(1.0, 0.65),
                        DistortionFunction::table(table_from("x,value\n0.5,0.3\n"))}) {
    CAPTURE(w.describe());
    CHECK(w(0.0) == 0.0);
    CHECK(w(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double v = w(i / 100.0);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("utility tables") {
  const auto lin = UtilityFunction::table(table_from("# saturation=2\nx,value\n1,1\n3,1.5\n"));
  CHECK(lin(0.0) == 0.0);
  CHECK(lin(2.0) == doctest::Approx(1.25));
  CHECK(lin(20.0) < 2.0);
  CHECK(lin(20.0) > 1.99);
  CHECK(lin.inverse(1.25) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK_THROWS_AS(UtilityFunction::table(table_from("x,value\n1,1\n")), ParameterError);
  CHECK_THROWS_AS(UtilityFunction::table(table_from("# saturation=inf\nx,value\n1,1\n2,1\n")), ParameterError);

  // z(t) = e^t stored in log coordinates
  const auto fast = UtilityFunction::table(table_from("# saturation=inf\n# coords=loglog\nx,value\n0,1\n10,22026.465794806718\n"));
  CHECK(z_transform(fast)(0.0) == doctest::Approx(1.0));
}
