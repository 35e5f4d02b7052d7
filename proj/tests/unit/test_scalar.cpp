#include "doctest.h"

#include "knva/errors.hpp"
#include "knva/index.hpp"
#include "knva/scalar.hpp"

using namespace knva;

TEST_CASE("rationals stay reduced with positive denominator") {
  Scalar a = Scalar::parse("6/-4");
  CHECK(a.str() == "-3/2");
  Scalar b = Scalar::parse("7");
  CHECK(b.str() == "7/1");
  CHECK((a + b).str() == "11/2");
  CHECK((a * b).str() == "-21/2");
  CHECK((a / b).str() == "-3/14");
}

TEST_CASE("mixed-mode arithmetic is rejected") {
  ScalarKind c{ScalarMode::complex, 40};
  CHECK_THROWS_AS(Scalar::integer(1) + c.one(), ScalarModeError);
  CHECK_THROWS_AS(Scalar::integer(1) * c.one(), ScalarModeError);
  CHECK_FALSE(Scalar::integer(1) == c.one());
}

TEST_CASE("complex arithmetic") {
  PrecisionScope scope(50);
  Scalar i = Scalar::complex(Real(0), Real(1), 50);
  Scalar m1 = i * i;
  CHECK(m1 == ScalarKind{ScalarMode::complex, 50}.from_int(-1));
  Scalar z = Scalar::complex(Real(3), Real(4), 50);
  CHECK(z.abs() == doctest::Approx(5.0));
  Scalar q = (z * i) / i;
  CHECK(distance(q, z) < 1e-45);
}

TEST_CASE("scalar strings round-trip digit-exactly") {
  PrecisionScope scope(60);
  Real third = Real(1) / 3;
  Scalar z = Scalar::complex(third, Real(-2) / 7, 60);
  std::string s = z.str();
  CHECK(s.back() == '0');
  CHECK(s.find("@60") != std::string::npos);
  Scalar back = Scalar::parse(s);
  CHECK(back.str() == s);
  CHECK(distance(back, z) < 1e-58);
  CHECK_THROWS_AS(Scalar::parse("(1,2"), ParseError);
  CHECK_THROWS_AS(Scalar::parse("1/0"), ParseError);
  CHECK_THROWS_AS(Scalar::parse("abc"), ParseError);
}

TEST_CASE("index parsing and s_lambda") {
  CHECK(parse_index("6.5", 1) == 13);
  CHECK(parse_index("-3/2", 1) == -3);
  CHECK(parse_index("g/2-1", 1) == -1);
  CHECK(parse_index("g/2+3", 0) == 6);
  CHECK(parse_index("g/2", 2) == 2);
  CHECK(parse_index("-0.5", 1) == -1);
  CHECK_THROWS_AS(parse_index("1/2", 0), ParseError);
  CHECK_THROWS_AS(parse_index("1.25", 1), ParseError);
  CHECK(index_str(-3) == "-3/2");
  CHECK(index_str(4) == "2");
  CHECK(s_lambda(2, 0) == 1);
  CHECK(s_lambda(2, 2) == -1);
  for (int l = -3; l <= 3; ++l) CHECK(s_lambda(0, l) == l);
}
