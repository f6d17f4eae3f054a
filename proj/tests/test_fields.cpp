#include "doctest.h"

#include "subsym/fields.hpp"
#include "subsym/normalize.hpp"
#include "support.hpp"

using namespace subsym;

namespace {

EvoField random_field(testkit::Gen& g, const JetContext& c) {
  return EvoField{{g.expr(c, 2, 1), g.expr(c, 2, 1)}};
}

}  // namespace

TEST_CASE("prolonged action on jets") {
  JetContext c = testkit::plane_context();
  EvoField f{{c.parse("x*u"), c.parse("v^2")}};
  CHECK(is_zero(apply(f, c.parse("u_y"), c) - c.parse("x*u_y")));
  CHECK(is_zero(apply(f, c.parse("u_x"), c) - c.parse("u + x*u_x")));
  CHECK(is_zero(apply(f, c.parse("v_x*u"), c) - c.parse("2*v*v_x*u + v_x*x*u")));
}

TEST_CASE("evolutionary fields commute with total derivatives") {
  JetContext c = testkit::plane_context();
  testkit::Gen g(31);
  for (int i = 0; i < 25; ++i) {
    EvoField f = random_field(g, c);
    Expr e = g.expr(c, 2, 1);
    for (int j = 0; j < 2; ++j)
      CHECK(is_zero(apply(f, total_derivative(e, j, c), c) - total_derivative(apply(f, e, c), j, c)));
  }
}

TEST_CASE("commutator characteristic realizes the bracket") {
  JetContext c = testkit::plane_context();
  testkit::Gen g(32);
  for (int i = 0; i < 15; ++i) {
    EvoField f = random_field(g, c), h = random_field(g, c);
    Expr e = g.expr(c, 2, 1);
    EvoField k = commutator(f, h, c);
    Expr lhs = apply(k, e, c);
    Expr rhs = apply(f, apply(h, e, c), c) - apply(h, apply(f, e, c), c);
    CHECK(is_zero(lhs - rhs));
    EvoField back = commutator(h, f, c);
    CHECK(same_field(k, scale(back, Expr(-1))));
  }
}

TEST_CASE("point fields in evolutionary form") {
  JetContext c = testkit::plane_context();
  PointField p{{c.parse("x"), c.parse("0")}, {c.parse("u"), c.parse("1")}};
  EvoField e = canonicalize(p, c);
  CHECK(is_zero(e.alpha[0] - c.parse("u - x*u_x")));
  CHECK(is_zero(e.alpha[1] - c.parse("1 - x*v_x")));
  CHECK(is_zero(point_apply(p, c.parse("x*v"), c) - c.parse("x*v + x")));
  CHECK(same_field(EvoField::zero(c), EvoField{{Expr(), Expr()}}));
}

// Oracle: the translation flow of x^2 + y is (x - eps)^2 + y.
TEST_CASE("truncated flow of a translation") {
  JetContext c;
  c.indep = {"x", "y"};
  c.deps = {"u"};
  EvoField f{{c.parse("-u_x")}};
  Flow fl = flow_truncated(f, {c.parse("x^2 + y")}, 3, c);
  Expr expect = pow(c.x(0) - fl.eps, 2) + c.x(1);
  CHECK(is_zero(fl.series[0] - expect));
  auto r = flow_residual(fl, c.parse("u_y - 1"), c);
  for (const Expr& k : r) CHECK(is_zero(k));
}
