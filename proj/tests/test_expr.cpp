#include <doctest.h>

#include "pilekit/expr.hpp"

#include <cmath>

using namespace pilekit;

namespace {
Eigen::RowVectorXd pt2(double a, double b) {
  Eigen::RowVectorXd p(2);
  p << a, b;
  return p;
}
}  // namespace

TEST_CASE("constants and coordinates evaluate") {
  auto c = CoefficientFn::parse("2.5");
  CHECK(c.eval(pt2(0.3, -0.7)) == doctest::Approx(2.5));
  CHECK(c.is_constant());

  auto x2 = CoefficientFn::parse("x2");
  CHECK(x2.eval(pt2(0.3, -0.7)) == doctest::Approx(-0.7));
  CHECK(x2.min_dimension() == 2);
}

TEST_CASE("grammar covers the forcing of the first case study") {
  auto g = CoefficientFn::parse("10 + 10*sin(2*pi*x1)*sin(2*pi*x2)");
  double x = 0.3, y = -0.2;
  double want = 10 + 10 * std::sin(2 * M_PI * x) * std::sin(2 * M_PI * y);
  CHECK(g.eval(pt2(x, y)) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("powers, unary minus, precedence") {
  auto e = CoefficientFn::parse("-x1^2 + 3*x2 - 2");
  CHECK(e.eval(pt2(2.0, 1.0)) == doctest::Approx(-4.0 + 3.0 - 2.0));
  CHECK(CoefficientFn::parse("x1^0").eval(pt2(5.0, 0.0)) == doctest::Approx(1.0));
  CHECK(CoefficientFn::parse("(x1 - x2)^3").eval(pt2(2.0, 1.0)) == doctest::Approx(1.0));
  CHECK(CoefficientFn::parse("2*cos(0)").eval(pt2(0, 0)) == doctest::Approx(2.0));
}

TEST_CASE("parse -> print -> parse round-trips to an equal tree") {
  const char* cases[] = {
      "10 + 10*sin(2*pi*x1)*sin(2*pi*x2)",
      "-x1^2 + 3*x2 - 2",
      "sin(x1 - cos(x2))*x1^3",
      "1.5e-3*x1 + pi",
      "(x1 + x2)*(x1 - x2)",
  };
  for (const char* text : cases) {
    CAPTURE(text);
    auto e1 = CoefficientFn::parse(text);
    auto e2 = CoefficientFn::parse(e1.print());
    CHECK(e1.equals(e2));
    CHECK(e1.print() == e2.print());
    // evaluation agrees as well
    CHECK(e1.eval(pt2(0.37, -0.61)) == doctest::Approx(e2.eval(pt2(0.37, -0.61))).epsilon(1e-15));
  }
}

TEST_CASE("syntax errors carry a column") {
  CHECK_THROWS_AS(CoefficientFn::parse("sin("), ExprParseError);
  try {
    CoefficientFn::parse("sin(");
  } catch (const ExprParseError& e) {
    CHECK(e.column() == 5);
  }
  CHECK_THROWS_AS(CoefficientFn::parse("x1 +"), ExprParseError);
  CHECK_THROWS_AS(CoefficientFn::parse("bogus(3)"), ExprParseError);
  CHECK_THROWS_AS(CoefficientFn::parse("x1 ^ -2"), ExprParseError);  // exponent must be >= 0
  CHECK_THROWS_AS(CoefficientFn::parse("x0"), ExprParseError);       // 1-based coordinates
}

TEST_CASE("coordinate beyond dimension fails at evaluation") {
  auto e = CoefficientFn::parse("x3");
  CHECK_THROWS_AS(e.eval(pt2(0, 0)), SpecError);
}
