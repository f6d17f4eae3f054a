#include "doctest.h"

#include "subsym/errors.hpp"
#include "subsym/expr.hpp"
#include "subsym/normalize.hpp"
#include "subsym/parse.hpp"
#include "support.hpp"

using namespace subsym;

namespace {

JetContext ctx() { return testkit::plane_context(); }

}  // namespace

TEST_CASE("parse and print round trip") {
  JetContext c = ctx();
  for (const char* s : {"x + y*u_x", "u_{xy}^2 - 3/4*v", "sin(u)*cos(v_y) + exp(x/2)", "sqrt(1 + u^2)",
                        "(x + 1)^-2", "-u_xx + v_yy"}) {
    Expr e = c.parse(s);
    Expr back = c.parse(to_string(e));
    CHECK(normalize(back) == normalize(e));
  }
}

TEST_CASE("round trip on random expressions") {
  JetContext c = ctx();
  testkit::Gen g(11);
  for (int i = 0; i < 60; ++i) {
    Expr e = normalize(g.expr(c, 3));
    CHECK(normalize(c.parse(to_string(e))) == e);
  }
}

TEST_CASE("normalize is idempotent and keeps numeric value") {
  JetContext c = ctx();
  testkit::Gen g(7);
  for (int i = 0; i < 80; ++i) {
    Expr e = g.expr(c, 3);
    Expr n = normalize(e);
    CHECK(normalize(n) == n);
    auto p = g.point(c, 2);
    INFO(to_string(e), " -> ", to_string(n), ": ", p(e), " vs ", p(n));
    CHECK(testkit::close(p(e), p(n), 1e-8));
  }
}

TEST_CASE("zero recognition") {
  JetContext c = ctx();
  CHECK(is_zero(c.parse("(x + 1)^2 - x^2 - 2*x - 1")));
  CHECK(is_zero(c.parse("sin(u)^2 + cos(u)^2 - 1")));
  CHECK(is_zero(c.parse("tan(u) - sin(u)/cos(u)")));
  CHECK(is_zero(c.parse("exp(x)*exp(y) - exp(x + y)")));
  CHECK(is_zero(c.parse("exp(x)^2*exp(y) - exp(2*x + y)")));
  CHECK(is_zero(c.parse("exp(x)^3/exp(x) - exp(2*x)")));
  CHECK(is_zero(c.parse("1/(x - 1) - 1/(x + 1) - 2/(x^2 - 1)")));
  CHECK_FALSE(is_zero(c.parse("x - y")));
  CHECK_FALSE(is_zero(c.parse("sin(u)^2 - 1")));
}

TEST_CASE("structural ordering is total and consistent") {
  JetContext c = ctx();
  testkit::Gen g(3);
  std::vector<Expr> v;
  for (int i = 0; i < 30; ++i) v.push_back(normalize(g.expr(c, 2)));
  for (const Expr& a : v)
    for (const Expr& b : v) {
      CHECK(compare(a, b) == -compare(b, a));
      CHECK((compare(a, b) == 0) == (a == b));
    }
}

TEST_CASE("partial derivative agrees with central differences") {
  JetContext c = ctx();
  testkit::Gen g(5);
  const double h = 1e-5;
  for (int i = 0; i < 60; ++i) {
    Expr e = g.expr(c, 3);
    Expr wrt = g.coin() ? c.x(g.integer(0, 1)) : g.jet(c, 2);
    Expr d = diff_partial(e, wrt);
    auto p = g.point(c, 2);
    std::string key = to_string(wrt);
    auto hi = p, lo = p;
    hi.at[key] += h;
    lo.at[key] -= h;
    double fd = (hi(e) - lo(e)) / (2 * h);
    CHECK(testkit::close(p(d), fd, 1e-4));
  }
}

TEST_CASE("formal derivatives of opaque functions") {
  JetContext c = ctx();
  c.opaque["F"] = 2;
  Expr e = c.parse("F(x*u, y)");
  Expr d = diff_partial(e, c.parse("u"));
  CHECK(is_zero(d - c.parse("x*F'[1](x*u, y)")));
  CHECK(is_zero(diff_partial(c.parse("F'[1](x, y)"), c.parse("y")) - c.parse("F'[1,2](x, y)")));
  CHECK(is_zero(c.parse("F'[2,1](x, y) - F'[1,2](x, y)")));
}

TEST_CASE("integrals are compared up to the bound variable") {
  JetContext c = ctx();
  c.opaque["F"] = 1;
  Expr a = c.parse("Int(s*F(s), s, u)");
  Expr b = c.parse("Int(z*F(z), z, u)");
  CHECK(is_zero(a - b));
  CHECK(is_zero(diff_partial(a, c.parse("u")) - c.parse("u*F(u)")));
}

TEST_CASE("parser extensions") {
  JetContext c = ctx();
  c.defs["w"] = c.parse("x^2 + u");
  CHECK(is_zero(c.parse("w - u") - c.parse("x^2")));
  CHECK(is_zero(c.parse("diff(x^3*u, x)") - c.parse("3*x^2*u")));
  CHECK(c.parse("Diff(u, x, y)") == c.parse("u_xy"));
  CHECK(c.parse("u_{yx}") == c.parse("u_xy"));
}

TEST_CASE("parse errors") {
  JetContext c = ctx();
  CHECK_THROWS_AS(c.parse("x +"), ParseError);
  CHECK_THROWS_AS(c.parse("(x"), ParseError);
  CHECK_THROWS_AS(c.parse("q + 1"), UnknownSymbol);
  CHECK_THROWS_AS(c.parse("w_x"), UnknownSymbol);
}

TEST_CASE("positive scope") {
  JetContext c;
  c.indep = {"t"};
  c.deps = {"r", "th"};
  Expr e = c.parse("sqrt(r^2) - r");
  CHECK_FALSE(is_zero(e));
  {
    PositiveScope pos({"r"});
    CHECK(is_zero(e));
    CHECK(is_zero(c.parse("arctan(r*cos(th), r*sin(th)) - th")));
  }
  CHECK_FALSE(is_zero(e));
}

TEST_CASE("coefficient extraction") {
  JetContext c = ctx();
  Expr e = c.parse("3*u_x^2*x + y*u_x - 5");
  auto k = poly_coefficients(e, c.parse("u_x"));
  REQUIRE(k.size() == 3);
  CHECK(is_zero(k[0] + 5));
  CHECK(is_zero(k[1] - c.parse("y")));
  CHECK(is_zero(k[2] - c.parse("3*x")));
}

TEST_CASE("substitution is simultaneous") {
  JetContext c = ctx();
  ExprMap m{{c.parse("x"), c.parse("y")}, {c.parse("y"), c.parse("x")}};
  CHECK(normalize(substitute(c.parse("x - 2*y"), m)) == normalize(c.parse("y - 2*x")));
}
