#include "doctest.h"

#include "subsym/corpus.hpp"
#include "subsym/errors.hpp"
#include "subsym/invariance.hpp"
#include "subsym/normalize.hpp"

using namespace subsym;

TEST_CASE("heat symmetries") {
  CorpusEntry e = load("heat");
  for (const char* f : {"X1", "X2", "X3", "X4", "X5", "X6"}) CHECK(check_symmetry(e.field(f), *e.system).holds);
  EvoField bad{{Expr(), e.system->ctx().parse("u")}};
  auto r = check_symmetry(bad, *e.system);
  CHECK_FALSE(r.holds);
  CHECK(r.residuals.size() == 2);
}

TEST_CASE("classification cases on the trivial system") {
  CorpusEntry e = load("trivial-xy");
  const SubSystem& s1 = e.subsystem("S1");
  CHECK(classify(e.field("Z"), s1) == Classification::Symmetry);
  CHECK(classify(e.field("Yt"), s1) == Classification::SubsystemSymmetry);
  CHECK(classify(e.field("W"), s1) == Classification::OtherSubsymmetry);
  CHECK(classify(e.field("N"), s1) == Classification::NotSubsymmetry);
  CHECK(classification_name(Classification::Symmetry) == "Symmetry");
}

TEST_CASE("every symmetry is a sub-symmetry of each equation") {
  CorpusEntry e = load("sine-gordon");
  for (const char* f : {"X1", "X2", "X3"}) {
    CHECK(check_symmetry(e.field(f), *e.system).holds);
    CHECK(check_subsymmetry(e.field(f), e.subsystem("S")).holds);
    CHECK(check_subsymmetry(e.field(f), e.subsystem("E1")).holds);
  }
}

TEST_CASE("linear solver") {
  JetContext c;
  c.indep = {"x"};
  c.params = {"a", "b"};
  Expr a = c.parse("a"), b = c.parse("b");
  auto s = solve_linear_params({c.parse("a + b - 3"), c.parse("a - b - x")}, {a, b});
  REQUIRE(s.consistent);
  CHECK(is_zero(s.values.at(a) - c.parse("(3 + x)/2")));
  CHECK(is_zero(s.values.at(b) - c.parse("(3 - x)/2")));
  auto bad = solve_linear_params({c.parse("a - 1"), c.parse("a - 2")}, {a});
  CHECK_FALSE(bad.consistent);
  REQUIRE(bad.certificate.size() == 1);
  CHECK_FALSE(is_zero(bad.certificate[0]));
  CHECK_THROWS_AS(solve_linear_params({c.parse("a*b - 1"), c.parse("a^2 - b")}, {a, b}), NonlinearParameter);
}

TEST_CASE("determining equations for an unknown characteristic") {
  CorpusEntry e = load("trivial-xy");
  const CorpusAnsatz& an = e.ansatz.at("alpha");
  DeterminingOptions o;
  o.unknowns = {"alpha"};
  o.condition = Condition::Subsymmetry;
  auto d = determining_equations(*an.characteristic, e.subsystem("S1"), o);
  REQUIRE(d.equations.size() == 1);
  CHECK(is_zero(d.equations[0] - an.ctx.parse("alpha'[1](x, y, z, u)")));
}

TEST_CASE("function substitution and argument restriction") {
  JetContext c;
  c.indep = {"t", "x"};
  c.deps = {"u"};
  c.opaque = {{"R", 3}};
  Expr e = c.parse("R'[3](t, x, u) + R(t, x, u)");
  Expr s = substitute_function(e, "R", {c.parse("t"), c.parse("x"), c.parse("u")}, c.parse("u^2*t"));
  CHECK(is_zero(s - c.parse("2*u*t + u^2*t")));
  Expr r = restrict_arguments(c.parse("R(t, x, u)"), {"R"}, c);
  CHECK(r.kind() == Kind::Opaque);
  CHECK(r.args().size() == 2);
}

TEST_CASE("split condition separates jets") {
  JetContext c;
  c.indep = {"x"};
  c.deps = {"u"};
  c.params = {"a"};
  auto d = split_condition(c.parse("a*u_x^2 + (a - 1)*u_x + 2"), {});
  CHECK(d.equations.size() == 3);
}
