#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cptq/choquet.hpp"
#include "cptq/errors.hpp"
#include "support/oracles.hpp"

using namespace cptq;

namespace {

const UtilityFunction kId = UtilityFunction::power(1.0);

}  // namespace

TEST_CASE("survival probabilities") {
  const Law two = Law::discrete({{2.0, 0.25}, {0.0, 0.75}});
  CHECK(survival(two, 1.0) == 0.25);
  CHECK(survival(two, -1e300) == 1.0);
  const Law unif = Law::quantile([](double p) { return p; });
  CHECK(survival(unif, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(survival(unif, -1.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("choquet integral of simple laws") {
  const Law two = Law::discrete({{2.0, 0.25}, {0.0, 0.75}});
  CHECK(choquet_positive(two, kId, DistortionFunction::power(2.0)).value() == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(oracle::choquet_decision_weights(two, kId, DistortionFunction::power(2.0)) == doctest::Approx(0.125).epsilon(1e-15));
  const auto u = UtilityFunction::logarithmic();
  for (const auto& w : {DistortionFunction::identity(), DistortionFunction::prelec(1.0, 0.5)}) {
    CHECK(choquet_positive(Law::constant(3.0), u, w).value() == doctest::Approx(u(3.0)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(choquet_positive(Law::discrete({{-1.0, 0.5}, {1.0, 0.5}}), u, DistortionFunction::identity()), DomainError);
  CHECK_THROWS_AS(choquet_positive(Law::quantile([](double p) { return p - 0.5; }), u, DistortionFunction::identity()),
                  DomainError);
}

TEST_CASE("discrete law validation") {
  CHECK_THROWS_AS(Law::discrete({{1.0, 0.5}, {2.0, 0.4}}), ParameterError);
  CHECK_THROWS_AS(Law::discrete({{1.0, 1.0}, {2.0, 0.0}}), ParameterError);
  CHECK_THROWS_AS(Law::discrete({{INFINITY, 1.0}}), ParameterError);
  CHECK_NOTHROW(Law::discrete({{1.0, 0.5 + 5e-13}, {2.0, 0.5}}));
}

TEST_CASE("cpt value of elementary payoffs") {
  const CptPreferences lin{kId, kId, DistortionFunction::identity(), DistortionFunction::identity()};
  const CptValue zero = cpt_value(Law::constant(0.0), lin);
  CHECK(zero.v_plus == 0.0);
  CHECK(zero.v_minus == 0.0);
  CHECK(zero.total == 0.0);
  const CptValue coin = cpt_value(Law::discrete({{1.0, 0.5}, {-1.0, 0.5}}), lin);
  CHECK(coin.total.value() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(to_string(coin).find("total=") != std::string::npos);
}

TEST_CASE("divergent loss side gives minus infinity") {
  // X- with quantile (1-p)^-2 has E[X-] = inf.
  const Law heavy = Law::quantile([](double p) { return 1.0 - std::pow(p, -2.0); }, "heavy left tail");
  const CptPreferences prefs{UtilityFunction::exponential(1.0), kId, DistortionFunction::identity(),
                             DistortionFunction::identity()};
  const CptValue v = cpt_value(heavy, prefs);
  CHECK(v.v_minus.is_pos_inf());
  CHECK(v.total.is_neg_inf());
}

TEST_CASE("quantile quadrature matches closed forms") {
  // X uniform on [0, 1], identity utility, power distortion p^2: int_0^1 (1-s) d(s^2) = 1/3
  const Law unif = Law::quantile([](double p) { return p; });
  CHECK(choquet_positive(unif, kId, DistortionFunction::power(2.0)).value() == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  // Exponential law, identity distortion: E[X] = 1
  const Law expo = Law::quantile([](double p) { return -std::log1p(-p); });
  CHECK(choquet_positive(expo, kId, DistortionFunction::identity()).value() == doctest::Approx(1.0).epsilon(1e-5));
  // Same law, w(p) = sqrt(p): int_0^inf sqrt(e^-y) dy = 2. The log singularity
  // against the infinite slope of w at 0 leaves an end-cell bias of order sqrt(h) log h.
  CHECK(choquet_positive(expo, kId, DistortionFunction::power(0.5)).value() == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("choquet integral agrees with the decision-weights oracle on random laws") {
  std::mt19937_64 rng(20240611);
  const std::vector<UtilityFunction> us = {kId, UtilityFunction::logarithmic(), UtilityFunction::power(0.5),
                                           UtilityFunction::exponential(1.0)};
  const std::vector<DistortionFunction> ws = {DistortionFunction::identity(), DistortionFunction::power(0.6),
                                              DistortionFunction::prelec(1.0, 0.65), DistortionFunction::power(2.0)};
  std::uniform_int_distribution<int> size(1, 40);
  for (int trial = 0; trial < 1000; ++trial) {
    Law law = oracle::random_discrete_law(rng, size(rng), 0.0, 10.0);
    if (trial % 3 == 0) {
      // force ties
      std::vector<Atom> atoms(law.atoms().begin(), law.atoms().end());
      for (auto& a : atoms) a.value = std::round(a.value);
      law = Law::discrete(atoms);
    }
    const auto& u = us[trial % us.size()];
    const auto& w = ws[(trial / 4) % ws.size()];
    const double lib = choquet_positive(law, u, w).value();
    CHECK(std::abs(lib - oracle::choquet_decision_weights(law, u, w)) <= 1e-10 * std::max(1.0, lib));
    if (w.kind() == DistortionFunction::Kind::identity) {
      double eu = 0.0;
      for (const Atom& a : law.atoms()) eu += a.prob * u(a.value);
      CHECK(std::abs(lib - eu) <= 1e-10);
    }
  }
}

TEST_CASE("choquet integral agrees with a Riemann sum over levels") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Law law = oracle::random_discrete_law(rng, 6, 0.0, 5.0);
    const auto u = UtilityFunction::power(0.5);
    const auto w = DistortionFunction::prelec(1.0, 0.65);
    CHECK(choquet_positive(law, u, w).value() == doctest::Approx(oracle::choquet_riemann(law, u, w, 200000)).epsilon(1e-4));
  }
}

TEST_CASE("choquet integral is monotone in the distortion and homogeneous for identity utility") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Law law = oracle::random_discrete_law(rng, 12, 0.0, 3.0);
    // p^2 <= p <= sqrt(p) pointwise
    const double lo = choquet_positive(law, UtilityFunction::logarithmic(), DistortionFunction::power(2.0)).value();
    const double mid = choquet_positive(law, UtilityFunction::logarithmic(), DistortionFunction::identity()).value();
    const double hi = choquet_positive(law, UtilityFunction::logarithmic(), DistortionFunction::power(0.5)).value();
    CHECK(lo <= mid);
    CHECK(mid <= hi);
    const double c = scale(rng);
    const auto w = DistortionFunction::prelec(1.0, 0.65);
    const double base = choquet_positive(law, kId, w).value();
    CHECK(std::abs(choquet_positive(law.scaled(c), kId, w).value() - c * base) <= 1e-10 * std::max(1.0, c * base));
  }
}

TEST_CASE("gains value never exceeds the saturation level") {
  std::mt19937_64 rng(11);
  const CptPreferences prefs{UtilityFunction::exponential(1.0), UtilityFunction::logarithmic(),
                             DistortionFunction::power(0.3), DistortionFunction::prelec(1.0, 0.5)};
  for (int trial = 0; trial < 200; ++trial) {
    const Law law = oracle::random_discrete_law(rng, 10, -5.0, 1e3);
    CHECK(cpt_value(law, prefs).v_plus <= 1.0);
  }
}

TEST_CASE("discrete law CSV round trip") {
  std::istringstream in("# a comment\nvalue,prob\n-1,0.25\n3,0.75\n");
  const Law law = parse_discrete_law(in);
  REQUIRE(law.atoms().size() == 2);
  CHECK(law.atoms()[0].value == -1.0);
  std::ostringstream out;
  write_discrete_law(out, law);
  std::istringstream back(out.str());
  CHECK(parse_discrete_law(back).atoms()[1].prob == 0.75);
  std::istringstream bad("value,probability\n1,1\n");
  CHECK_THROWS_AS(parse_discrete_law(bad), ParameterError);
}
