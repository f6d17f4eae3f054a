#include "doctest.h"

#include "subsym/errors.hpp"
#include "subsym/fields.hpp"
#include "subsym/jet.hpp"
#include "subsym/normalize.hpp"
#include "support.hpp"

using namespace subsym;

TEST_CASE("multi-index arithmetic") {
  MultiIndex a({1, 0, 1});
  CHECK(a.dirs() == std::vector<int>{0, 1, 1});
  CHECK(a.order() == 3);
  CHECK(a.count(1) == 2);
  CHECK(a.contains(MultiIndex({1, 1})));
  CHECK_FALSE(a.contains(MultiIndex({0, 0})));
  CHECK(a.minus(MultiIndex({1})) == MultiIndex({0, 1}));
  CHECK(a.plus(MultiIndex({0})) == MultiIndex({0, 0, 1, 1}));
}

TEST_CASE("jet nodes and their multi-indices") {
  JetContext c = testkit::plane_context();
  Expr j = c.u(1, MultiIndex({1, 0}));
  CHECK(j == c.parse("v_xy"));
  CHECK(c.index_of(j) == MultiIndex({0, 1}));
  CHECK(jet_order(j) == 2);
  CHECK(max_jet_order(c.parse("u_x*v_yyy + x")) == 3);
}

TEST_CASE("total derivative of simple expressions") {
  JetContext c = testkit::plane_context();
  CHECK(is_zero(total_derivative(c.parse("x*u"), 0, c) - c.parse("u + x*u_x")));
  CHECK(is_zero(total_derivative(c.parse("sin(u_y)"), 0, c) - c.parse("cos(u_y)*u_xy")));
  CHECK(is_zero(total_derivative(c.parse("u*v"), MultiIndex({0, 1}), c) -
                c.parse("u_xy*v + u_x*v_y + u_y*v_x + u*v_xy")));
}

// Oracle: on an explicit u(x, y), D_j agrees with the ordinary partial derivative.
TEST_CASE("total derivative matches differentiation on explicit solutions") {
  JetContext c = testkit::plane_context();
  testkit::Gen g(21);
  for (int i = 0; i < 40; ++i) {
    Expr e = g.expr(c, 3);
    std::vector<Expr> sol{g.expr(c, 2, 0, false), g.expr(c, 2, 0, false)};
    // only x, y and constants in the explicit solution
    ExprMap strip{{c.u(0), c.parse("x*y + 1")}, {c.u(1), c.parse("x - y^2")}};
    for (auto& s : sol) s = normalize(substitute(s, strip));
    int j = g.integer(0, 1);
    Expr lhs = substitute_solution(total_derivative(e, j, c), sol, c);
    Expr rhs = diff_partial(substitute_solution(e, sol, c), c.x(j));
    CHECK(is_zero(lhs - rhs));
  }
}

TEST_CASE("total derivatives commute") {
  JetContext c = testkit::plane_context();
  testkit::Gen g(22);
  for (int i = 0; i < 30; ++i) {
    Expr e = g.expr(c, 3);
    CHECK(is_zero(total_derivative(total_derivative(e, 0, c), 1, c) -
                  total_derivative(total_derivative(e, 1, c), 0, c)));
  }
}

TEST_CASE("pinned truncation order") {
  JetContext c = testkit::plane_context();
  c.max_order = 2;
  c.pinned = true;
  CHECK_NOTHROW(total_derivative(c.parse("u_x"), 1, c));
  CHECK_THROWS_AS(total_derivative(c.parse("u_xy"), 0, c), TruncationOverflow);
}

TEST_CASE("adjoint of a single operator term") {
  JetContext c = testkit::plane_context();
  OperatorCoeffs g;
  g[{0, MultiIndex({0})}] = c.parse("x*u");
  g[{1, MultiIndex{}}] = c.parse("v");
  auto r = adjoint_apply(g, 2, c);
  CHECK(is_zero(r[0] + c.parse("u + x*u_x")));
  CHECK(is_zero(r[1] - c.parse("v")));
}

// Oracle: integration by parts, F D_x G - (-D_x F) G is a total x-derivative.
TEST_CASE("adjoint identity on random coefficients") {
  JetContext c = testkit::plane_context();
  testkit::Gen g(23);
  for (int i = 0; i < 20; ++i) {
    Expr F = g.expr(c, 2, 1, false), G = g.expr(c, 2, 1, false);
    OperatorCoeffs op;
    op[{0, MultiIndex({0})}] = F;
    Expr adj = adjoint_apply(op, 1, c)[0];
    CHECK(is_zero(F * total_derivative(G, 0, c) - adj * G - total_derivative(F * G, 0, c)));
  }
}

TEST_CASE("fit_max_order") {
  JetContext c = testkit::plane_context();
  fit_max_order(c, {c.parse("u_xxy")});
  CHECK(c.max_order >= 3);
}
