#include <doctest.h>

#include <cmath>

#include "cptq/errors.hpp"
#include "cptq/extended_real.hpp"

using cptq::ExtendedReal;

TEST_CASE("extended reals order infinities around finite values") {
  CHECK(ExtendedReal::neg_inf() < ExtendedReal::finite(-1e300));
  CHECK(ExtendedReal::finite(1e300) < ExtendedReal::pos_inf());
  CHECK(ExtendedReal::pos_inf() == ExtendedReal::pos_inf());
  CHECK(ExtendedReal::finite(2.0) > 1.0);
}

TEST_CASE("extended real arithmetic") {
  CHECK((ExtendedReal::finite(1.0) - ExtendedReal::pos_inf()).is_neg_inf());
  CHECK((ExtendedReal::finite(1.5) + ExtendedReal::finite(2.0)).value() == 3.5);
  CHECK_THROWS_AS((void)(ExtendedReal::pos_inf() - ExtendedReal::pos_inf()), cptq::DomainError);
  CHECK_THROWS((void)ExtendedReal::pos_inf().value());
  CHECK_THROWS(ExtendedReal::from_double(std::nan("")));
}

TEST_CASE("extended real text round trip") {
  CHECK(ExtendedReal::pos_inf().to_string() == "inf");
  CHECK(ExtendedReal::neg_inf().to_string() == "-inf");
  CHECK(ExtendedReal::parse("inf").is_pos_inf());
  CHECK(ExtendedReal::parse("-inf").is_neg_inf());
  const double x = 0.1 + 0.2;
  CHECK(ExtendedReal::parse(ExtendedReal::finite(x).to_string()).value() == x);
}
