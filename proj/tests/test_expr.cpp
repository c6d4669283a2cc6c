#include <catch_amalgamated.hpp>

#include <cmath>

#include "nhsteer/errors.hpp"
#include "nhsteer/expr.hpp"

using namespace nhsteer;

namespace {

const std::vector<std::string> kNames{"x", "y", "theta"};

ErrorCode parse_error(const std::string& s) {
  try {
    parse_expr(s, kNames);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error for " << s);
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("parse and evaluate", "[expr]") {
  double x[3] = {0.5, -2.0, 0.3};
  CHECK(parse_expr("x + 2*y - 3", kNames).eval(x) == Catch::Approx(-6.5));
  CHECK(parse_expr("x^2/2", kNames).eval(x) == Catch::Approx(0.125));
  CHECK(parse_expr("-y^2", kNames).eval(x) == Catch::Approx(-4.0));
  CHECK(parse_expr("cos(theta)*sin(theta)", kNames).eval(x) == Catch::Approx(std::cos(0.3) * std::sin(0.3)));
  CHECK(parse_expr("1.5e-1 * (x + y)", kNames).eval(x) == Catch::Approx(-0.225));
  CHECK(parse_expr("2^-1", kNames).eval(x) == Catch::Approx(0.5));
}

TEST_CASE("parse errors carry a position", "[expr]") {
  CHECK(parse_error("x +") == ErrorCode::ParseError);
  CHECK(parse_error("(x") == ErrorCode::ParseError);
  CHECK(parse_error("z") == ErrorCode::ParseError);
  CHECK(parse_error("x $ y") == ErrorCode::ParseError);
  CHECK(parse_error("x^y") == ErrorCode::UnsupportedExpression);
  CHECK(parse_error("x^2^3") == ErrorCode::ParseError);
  CHECK(parse_error("exp(x)") == ErrorCode::UnsupportedExpression);
  CHECK(parse_error("1/x") == ErrorCode::UnsupportedExpression);
  CHECK(parse_error("x/0") == ErrorCode::ParseError);
  try {
    parse_expr("x + * y", kNames);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("column 5") != std::string::npos);
  }
}

TEST_CASE("derivatives", "[expr]") {
  Expr f = parse_expr("x^3*cos(theta) + y", kNames);
  double p[3] = {1.2, 0.4, -0.7};
  CHECK(f.diff(0).eval(p) == Catch::Approx(3 * 1.44 * std::cos(-0.7)));
  CHECK(f.diff(1).eval(p) == Catch::Approx(1.0));
  CHECK(f.diff(2).eval(p) == Catch::Approx(-1.728 * std::sin(-0.7)));
  CHECK(is_identically_zero(parse_expr("x*y - y*x", kNames), 3));
  CHECK_FALSE(is_identically_zero(parse_expr("sin(theta)", kNames), 3));
}

TEST_CASE("unicycle bracket", "[expr]") {
  ExprField x1{parse_expr("cos(theta)", kNames), parse_expr("sin(theta)", kNames), Expr(0)};
  ExprField x2{Expr(0), Expr(0), Expr(1)};
  ExprField b = lie_bracket(x1, x2);
  double p[3] = {0.1, 0.2, 0.9};
  auto v = eval(b, p);
  CHECK(v[0] == Catch::Approx(std::sin(0.9)));
  CHECK(v[1] == Catch::Approx(-std::cos(0.9)));
  CHECK(v[2] == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("polynomial round trip and tapes", "[expr]") {
  Expr f = parse_expr("(x + y)^3 - x*theta/4", kNames);
  auto p = f.to_poly(3);
  REQUIRE(p.has_value());
  Expr g = from_poly(*p);
  double pts[3][3] = {{0.1, 0.2, 0.3}, {-1, 2, 5}, {3, -3, 0.5}};
  Tape tape({f, g});
  std::vector<double> scratch;
  for (auto& q : pts) {
    double out[2];
    tape.eval(q, out, scratch);
    CHECK(out[0] == Catch::Approx(f.eval(q)));
    CHECK(out[1] == Catch::Approx(f.eval(q)));
  }
  CHECK_FALSE(parse_expr("sin(x)", kNames).to_poly(3).has_value());
}
