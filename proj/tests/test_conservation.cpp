#include "doctest.h"

#include "subsym/conservation.hpp"
#include "subsym/corpus.hpp"
#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"
#include "support.hpp"

using namespace subsym;

TEST_CASE("divergence and verification") {
  CorpusEntry sg = load("sine-gordon");
  const JetContext& c = sg.system->ctx();
  ConsLaw cl = verify_cl(sg.law("sgcl"), sg.system);
  REQUIRE(cl.characteristic.size() == 2);
  CHECK(is_zero(restrict(cl.characteristic[0] + c.parse("sin(u)"), *sg.system)));
  CHECK(is_zero(restrict(cl.characteristic[1] - c.parse("v"), *sg.system)));
  CHECK(is_zero(reassemble(cl.decomposition, *sg.system) - divergence(cl.fluxes, c)));
  CHECK_FALSE(is_trivial(cl));
  CHECK_THROWS_AS(verify_cl({c.parse("u"), c.parse("v")}, sg.system), NotAConservationLaw);
}

// Oracle: (D_y f, -D_x f) is divergence free for any f.
TEST_CASE("curl laws are trivial") {
  CorpusEntry sg = load("sine-gordon");
  const JetContext& c = sg.system->ctx();
  testkit::Gen g(51);
  for (int i = 0; i < 8; ++i) {
    Expr f = g.expr(c, 2, 1, false);
    ConsLaw cl = verify_cl({total_derivative(f, 1, c), -total_derivative(f, 0, c)}, sg.system);
    CHECK(is_trivial(cl));
  }
}

TEST_CASE("deformation by sub-symmetries") {
  CorpusEntry sg = load("sine-gordon");
  ConsLaw cl = verify_cl(sg.law("sgcl"), sg.system);
  ConsLaw y = deform(sg.field("Y1"), cl);
  CHECK(is_zero(y.fluxes[0] + cl.fluxes[0]));
  CHECK(is_zero(y.fluxes[1] + cl.fluxes[1]));
  CHECK(is_trivial(deform(sg.field("X1"), cl)));
  CHECK_THROWS_AS(deform(sg.field("G"), cl), PreconditionViolation);
}

TEST_CASE("inverse deformation") {
  CorpusEntry sg = load("sine-gordon");
  const JetContext& c = sg.system->ctx();
  EvoField f = inverse_deform(sg.law("sgcl"), sg.law("sgcl"), c);
  CHECK(is_zero(f.alpha[0] + c.parse("cot(u)")));
  CHECK(is_zero(f.alpha[1] - c.parse("v/2")));
  CorpusEntry hopf = load("hopf");
  CHECK_THROWS_AS(inverse_deform(hopf.law("A"), hopf.law("P"), hopf.system->ctx()), RankDeficient);
  CHECK_THROWS_AS(inverse_deform({c.parse("u_x"), c.parse("v")}, sg.law("sgcl"), c), NonFunctionFluxes);
}

TEST_CASE("gauge fields give trivial laws") {
  CorpusEntry tt = load("telegraph-tanu");
  ConsLaw d1 = verify_cl(tt.law("D1"), tt.system);
  const JetContext& ct = tt.system->ctx();
  EvoField X = gauge_field(d1.fluxes, ct.parse("x*u + t^2"), ct);
  ConsLaw g = deform(X, d1);
  CHECK(is_trivial(g));
}

TEST_CASE("Frechet system for the Hopf laws") {
  JetContext h;
  h.indep = {"t", "x"};
  h.deps = {"u"};
  Expr u = h.parse("u");
  auto fs = frechet_system({u, h.parse("u^2/2")}, {h.parse("u^2/2"), h.parse("u^3/3")}, h);
  CHECK(fs.equations.size() == 2);
  CHECK(fs.conditions.size() == 1);
}

TEST_CASE("telegraph catalog") {
  auto cat = telegraph_catalog();
  CHECK(cat.size() == 9);
  int printed_ok = 0;
  for (const auto& t : cat) {
    if (t.name.rfind("tanu-derived", 0) == 0 || t.name.rfind("tanu", 0) != 0) {
      CHECK_MESSAGE(t.law_verified, t.name);
      CHECK_MESSAGE(t.field_deforms, t.name);
    } else if (t.law_verified) {
      ++printed_ok;
    }
  }
  CHECK(printed_ok == 0);
}
