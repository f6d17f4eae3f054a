#include "doctest.h"

#include "subsym/corpus.hpp"
#include "subsym/decoupling.hpp"
#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"
#include "subsym/system.hpp"
#include "support.hpp"

using namespace subsym;

namespace {

std::shared_ptr<DiffSystem> heat() {
  JetContext c;
  c.indep = {"x", "t"};
  c.deps = {"u", "v"};
  return std::make_shared<DiffSystem>(c, std::vector<Expr>{c.parse("u_t - u_xx"), c.parse("v_t - u*v_xx")});
}

}  // namespace

TEST_CASE("leading jets and solved form") {
  auto s = heat();
  REQUIRE(s->size() == 2);
  CHECK(*s->equations()[0].lead == s->ctx().parse("u_xx"));
  CHECK(*s->equations()[1].lead == s->ctx().parse("v_xx"));
  CHECK(is_zero(s->equations()[1].rhs - s->ctx().parse("v_t/u")));
  auto p = s->principal(s->ctx().parse("u_xxt"));
  REQUIRE(p);
  CHECK(p->first == 0);
  CHECK(p->second == MultiIndex({1}));
  CHECK_FALSE(s->principal(s->ctx().parse("u_t")));
}

TEST_CASE("restriction removes principal jets") {
  auto s = heat();
  const JetContext& c = s->ctx();
  Expr r = restrict(c.parse("u_xxx + v_xx*u"), *s);
  CHECK(is_zero(r - c.parse("u_xt + v_t")));
  testkit::Gen g(41);
  for (int i = 0; i < 20; ++i) {
    Expr e = g.expr(c, 2, 3);
    Expr rr = restrict(e, *s);
    for (const Expr& j : collect_jets(rr)) CHECK_FALSE(s->principal(j));
  }
}

TEST_CASE("decomposition on the ideal reassembles") {
  auto s = heat();
  const JetContext& c = s->ctx();
  testkit::Gen g(42);
  for (int i = 0; i < 20; ++i) {
    Expr e = g.expr(c, 2, 3, false);
    Decomposition d = decompose_on_ideal(e, *s);
    CHECK(is_zero(reassemble(d, *s) - e));
    CHECK(is_zero(d.residual - restrict(e, *s)));
  }
}

TEST_CASE("sub-systems from multipliers") {
  auto s = heat();
  SubSystem ss = parse_multipliers("x*D1 + Dt*D2", s);
  REQUIRE(ss.rows() == 1);
  auto rows = eval_subsystem(ss);
  CHECK(is_zero(rows[0] - s->ctx().parse("x*(u_t - u_xx) + v_tt - u_t*v_xx - u*v_xxt")));
  SubSystem b = SubSystem::from_beta(s, {Expr(1), Expr(0)});
  CHECK(is_zero(eval_subsystem(b)[0] - (*s)[0]));
}

TEST_CASE("matrix helpers") {
  JetContext c = testkit::plane_context();
  std::vector<std::vector<Expr>> m{{c.parse("x"), c.parse("1")}, {c.parse("y"), c.parse("2")}};
  CHECK(is_zero(determinant(m) - c.parse("2*x - y")));
  auto inv = inverse(m);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Expr s = m[i][0] * inv[0][j] + m[i][1] * inv[1][j];
      CHECK(is_zero(s - Expr(i == j ? 1 : 0)));
    }
  std::vector<std::vector<Expr>> sing{{c.parse("x"), c.parse("y")}, {c.parse("2*x"), c.parse("2*y")}};
  CHECK_THROWS_AS(inverse(sing), SingularJacobian);
}

TEST_CASE("point maps") {
  JetContext c;
  c.indep = {"t"};
  c.deps = {"x", "y"};
  c.opaque = {{"F", 2}};
  PointMap polar = catalog_map("polar", c);
  CHECK(check_inverse(polar, c));
  CHECK_FALSE(is_zero(jacobian_det(polar, c)));
  DiffSystem s(c, {c.parse("x_t + y"), c.parse("y_t - x")});
  DiffSystem t = transform_system(s, polar);
  REQUIRE(t.size() == 2);
}
