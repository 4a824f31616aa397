#include <doctest.h>

#include <cmath>
#include <random>

#include "cptq/attainability.hpp"
#include "cptq/errors.hpp"
#include "support/oracles.hpp"

using namespace cptq;

namespace {

// Utility with z(t) = log u(e^t) = e^t, stored in log-log coordinates up to t = 700.
UtilityFunction double_exponential_utility() {
  FunctionTable t;
  t.coords = FunctionTable::Coords::loglog;
  t.saturation = ExtendedReal::pos_inf();
  for (int i = 0; i <= 1400; ++i) {
    t.x.push_back(0.5 * i);
    t.value.push_back(std::exp(0.5 * i));
  }
  return UtilityFunction::table(t);
}

std::vector<UtilityFunction> unbounded_catalog() {
  return {UtilityFunction::power(0.5), UtilityFunction::power(2.0), UtilityFunction::logarithmic(),
          UtilityFunction::loglog(), UtilityFunction::prelec(1.0, 0.5)};
}

}  // namespace

TEST_CASE("liminf condition") {
  const auto power_mismatch = liminf_condition(DistortionFunction::power(0.8), UtilityFunction::power(0.5));
  CHECK(power_mismatch.holds == Holds::no);
  CHECK(power_mismatch.evidence.size() >= 8);

  const auto u = normalize_utility(UtilityFunction::logarithmic()).utility;
  const auto boundary = liminf_condition(associated_distortion(u, 1.0), u);
  CHECK(boundary.holds == Holds::yes);
  CHECK(*boundary.parameter == doctest::Approx(1.0).epsilon(1e-9));

  for (double varpi : {0.5, 0.65}) {
    const auto log_prelec = liminf_condition(DistortionFunction::prelec(1.0, varpi), UtilityFunction::logarithmic());
    CHECK(log_prelec.holds == Holds::no);
  }
}

TEST_CASE("liminf condition under the associated distortion tracks delta") {
  for (const auto& base : unbounded_catalog()) {
    const auto u = normalize_utility(base).utility;
    for (double delta : {0.25, 0.5, 0.9, 1.0, 1.1, 1.5, 3.0}) {
      CAPTURE(base.describe());
      CAPTURE(delta);
      const auto v = liminf_condition(associated_distortion(u, delta), u);
      CHECK((v.holds == Holds::yes) == (delta <= 1.0));
    }
  }
}

TEST_CASE("delta threshold classification") {
  const auto high = check_delta_threshold(UtilityFunction::power(1.0), 1.5);
  CHECK(high.holds == Holds::no);
  CHECK(high.classification == "not_attainable");
  const auto low = check_delta_threshold(UtilityFunction::power(1.0), 0.5);
  CHECK(low.holds == Holds::yes);
  CHECK(low.classification == "attainable");
  const auto bounded = check_delta_threshold(UtilityFunction::exponential(1.0), 0.5);
  CHECK(bounded.classification == "invalid");
  CHECK(bounded.holds == Holds::no);
  CHECK(check_delta_threshold(UtilityFunction::power(0.7), 1.0).classification == "boundary");
}

TEST_CASE("growth condition on power utilities") {
  for (double alpha : {0.5, 1.0, 2.0, 5.0}) {
    for (double delta : {0.25, 0.5, 0.9}) {
      const auto v = check_existsxi(UtilityFunction::power(alpha), delta);
      CHECK(v.holds == Holds::yes);
      CHECK(*v.parameter * delta < 1.0);
      CHECK(v.evidence.size() >= 8);
    }
  }
}

TEST_CASE("growth condition on the Prelec utility and a double exponential") {
  CHECK(check_existsxi(UtilityFunction::prelec(1.0, 0.5), 0.5).holds == Holds::yes);
  CHECK(check_existsxi(UtilityFunction::prelec(2.0, 0.8), 0.9).holds == Holds::yes);
  const auto fast = check_existsxi(double_exponential_utility(), 0.5);
  CHECK(fast.holds == Holds::no);
  CHECK(fast.evidence.size() >= 8);
}

TEST_CASE("both readings of the growth condition agree on the catalog") {
  std::vector<UtilityFunction> us = unbounded_catalog();
  us.push_back(double_exponential_utility());
  us.push_back(UtilityFunction::power(5.0));
  for (const auto& u : us) {
    for (double delta : {0.25, 0.5, 0.9}) {
      CAPTURE(u.describe());
      CAPTURE(delta);
      CHECK(check_existsxi(u, delta).holds == existsxi_ratio_test(u, delta).holds);
    }
  }
}

TEST_CASE("asymptotic elasticity") {
  for (double varpi : {0.3, 0.5, 0.9}) {
    const auto z = z_transform(UtilityFunction::prelec(1.5, varpi));
    CHECK(std::abs(asymptotic_elasticity(z).value.value() - varpi) <= 2e-3);
  }
  CHECK(asymptotic_elasticity(z_transform(UtilityFunction::power(2.0))).value.value() == doctest::Approx(1.0).epsilon(1e-6));
  for (double alpha : {0.5, 1.0, 3.0}) {
    const auto u = UtilityFunction::power(alpha);
    CHECK(asymptotic_elasticity([&](double x) { return u(x); }).value.value() == doctest::Approx(alpha).epsilon(1e-6));
  }
  CHECK_THROWS_AS(asymptotic_elasticity([](double) { return -1.0; }), DomainError);
}

TEST_CASE("elasticity growth inequality") {
  const auto zp = z_transform(UtilityFunction::prelec(1.5, 0.6));
  CHECK(check_ae_growth(zp, 0.6, 1.0).holds == Holds::yes);
  const auto zl = z_transform(UtilityFunction::power(1.3));
  CHECK(check_ae_growth(zl, 1.0, 1.0).holds == Holds::yes);
  const auto bad = check_ae_growth(zl, 0.5, 1.0);
  CHECK(bad.holds == Holds::no);
  CHECK(bad.evidence.size() >= 8);
}

TEST_CASE("growth cap probe") {
  CHECK(growth_cap_probe(UtilityFunction::logarithmic(), 0.5, 1.0, 1.0).holds == Holds::yes);
  CHECK(growth_cap_probe(UtilityFunction::power(2.0), 1.0, 1.0, 1.0).holds == Holds::no);
}

TEST_CASE("G function for power utilities") {
  const double alpha = 2.0;
  const double delta = 0.5;
  const double zeta = 1.5;
  const auto g = g_function(UtilityFunction::power(alpha), delta, zeta);
  for (double lambda : {1.0, 2.0, 10.0, 1e6}) CHECK(g_eval(g, lambda) == doctest::Approx(1.0).epsilon(1e-12));
  for (double lambda : {0.9, 0.5, 0.1, 1e-3}) {
    const double closed = std::pow(lambda, 1.0 / (delta * alpha * (zeta - 1.0 / delta)));
    CHECK(std::abs(g_eval(g, lambda) - closed) <= 1e-6 * closed);
  }
  CHECK(g_eval(g, 0.5) >= g_eval(g, 2.0));
  CHECK_THROWS_AS(g_eval(g, 1e-6), ComputationError);
  CHECK_THROWS_AS(g_function(UtilityFunction::logarithmic(), 0.5, 1.5), ParameterError);
}

TEST_CASE("G function is non-increasing") {
  const auto u = normalize_utility(UtilityFunction::prelec(1.0, 0.5)).utility;
  const auto g = g_function(u, 0.5, 1.5);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> log_lambda(-0.3, 2.0);
  for (int i = 0; i < 100; ++i) {
    double a = std::pow(10.0, log_lambda(rng));
    double b = std::pow(10.0, log_lambda(rng));
    if (a > b) std::swap(a, b);
    CHECK(g_eval(g, a) >= g_eval(g, b));
    CHECK(g_eval(g, b) >= 1.0);
  }
}

TEST_CASE("tail bound examples") {
  const auto u = UtilityFunction::power(1.5);
  const auto w = DistortionFunction::prelec(1.0, 0.65);
  const auto one = tail_bound_wpfx(Law::constant(1.0), u, w, MonotoneMap::utility(u), u(1.0));
  CHECK(one.lhs == 0.0);
  CHECK(one.holds());
  CHECK_THROWS_AS(tail_bound_wpfx(Law::constant(1.0), u, w, MonotoneMap::identity(), 0.0), DomainError);
}

TEST_CASE("tail bounds hold on random laws") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> tdist(0.05, 12.0);
  std::uniform_real_distribution<double> sdist(0.5, 3.0);
  const std::vector<UtilityFunction> us = {UtilityFunction::power(0.5), UtilityFunction::power(2.0),
                                           normalize_utility(UtilityFunction::logarithmic()).utility,
                                           UtilityFunction::prelec(1.0, 0.5)};
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Law law = oracle::random_discrete_law(rng, 1 + trial % 15, 0.0, 10.0);
    const auto& u = us[trial % us.size()];
    const double delta = trial % 2 == 0 ? 0.5 : 0.9;
    const auto w = trial % 3 == 0 ? DistortionFunction::prelec(1.0, 0.65) : associated_distortion(u, delta);
    const double t = tdist(rng);
    if (!tail_bound_wpfx(law, u, w, MonotoneMap::identity(), t).holds(1e-9)) ++violations;
    if (!tail_bound_pxs(law, u, delta, sdist(rng), t).holds(1e-9)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("moment bound examples") {
  const double alpha = 2.0;
  const double delta = 0.5;
  const double zeta = 1.5;
  const double eta = 1.2;
  const auto u = UtilityFunction::power(alpha);
  const auto g = g_function(u, delta, zeta);
  const auto zero = moment_bound_exeta(Law::constant(0.0), u, delta, eta, zeta, g);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == doctest::Approx(5.0));

  // X in {0, 3} with equal odds: V_delta = w_delta(1/2) u(3) = 4.5, G(1/4.5) = 4.5^2,
  // u^-1(4.5^-2) = 1/4.5, C = 5.
  const Law two = Law::discrete({{0.0, 0.5}, {3.0, 0.5}});
  CHECK(v_delta(two, u, delta) == doctest::Approx(4.5).epsilon(1e-14));
  const auto b = moment_bound_exeta(two, u, delta, eta, zeta, g);
  CHECK(b.lhs == doctest::Approx(0.5 * std::pow(3.0, eta)).epsilon(1e-14));
  CHECK(b.rhs == doctest::Approx(5.0 + std::pow(20.25, eta) * 4.5).epsilon(1e-6));
  CHECK(b.holds());
  CHECK_THROWS_AS(moment_bound_exeta(two, u, delta, 1.6, zeta, g), ParameterError);
  CHECK_THROWS_AS(moment_bound_exeta(two, u, delta, 1.0, zeta, g), ParameterError);
}

TEST_CASE("moment bound holds on random bounded laws") {
  std::mt19937_64 rng(31415);
  const double delta = 0.5;
  const double zeta = 1.5;
  const double eta = 1.2;
  const std::vector<UtilityFunction> us = {UtilityFunction::power(2.0), UtilityFunction::power(1.0),
                                           UtilityFunction::prelec(1.0, 0.5)};
  std::vector<GFunction> gs;
  for (const auto& u : us) gs.push_back(g_function(u, delta, zeta));
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Law law = oracle::random_discrete_law(rng, 1 + trial % 20, 0.0, 10.0);
    const std::size_t k = static_cast<std::size_t>(trial) % us.size();
    if (!moment_bound_exeta(law, us[k], delta, eta, zeta, gs[k]).holds()) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("verdicts serialize with their evidence") {
  const auto v = check_delta_threshold(UtilityFunction::power(1.0), 0.5);
  const auto j = to_json(v);
  CHECK(j["holds"] == "yes");
  CHECK(j["evidence"].size() >= 8);
  CHECK(j["attached"].size() == 2);
  ConditionVerdict odd;
  odd.evidence.push_back({{1.0}, INFINITY});
  const auto parsed = nlohmann::json::parse(to_json(odd).dump());
  CHECK(parsed["evidence"][0]["value"] == "inf");
}
