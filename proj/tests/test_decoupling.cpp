#include "doctest.h"

#include "subsym/corpus.hpp"
#include "subsym/decoupling.hpp"
#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"

using namespace subsym;

TEST_CASE("decoupled rows") {
  CorpusEntry heat = load("heat");
  CHECK(is_decoupled(heat.subsystem("E1"), "u").decoupled);
  auto d = is_decoupled(heat.subsystem("E2"), "v");
  CHECK_FALSE(d.decoupled);
  CHECK_FALSE(d.offending.empty());
  const JetContext& c = heat.system->ctx();
  CHECK(is_decoupled({c.parse("exp(v)*u_t")}, c, "u", c.parse("exp(-v)")).decoupled);
  CHECK_FALSE(is_decoupled({c.parse("exp(v)*u_t")}, c, "u").decoupled);
}

TEST_CASE("lambda field and arbitrary lambda") {
  CorpusEntry heat = load("heat");
  const JetContext& c = heat.system->ctx();
  PointField V = heat.point_fields.at("V");
  EvoField lv = lambda_field(V, c);
  CHECK(lv.alpha[0].is_zero_number());
  CHECK(!collect_opaque(lv.alpha[1], "lambda").empty());
  CHECK(arbitrary_lambda_symmetry(V, heat.subsystem("E1")));
  PointField U{{Expr(), Expr()}, {Expr(1), Expr()}};
  CHECK_FALSE(arbitrary_lambda_symmetry(U, heat.subsystem("E1")));
}

TEST_CASE("catalog maps straighten their fields") {
  CorpusEntry dyn = load("dyn-polar");
  const JetContext& c = dyn.system->ctx();
  PointMap polar = catalog_map("polar", c);
  CHECK(check_inverse(polar, c));
  CHECK(verify_straightening(polar, dyn.point_fields.at("Rot"), c));
  PointField wrong{{Expr()}, {Expr(1), Expr()}};
  CHECK_FALSE(verify_straightening(polar, wrong, c));
  CHECK_THROWS_AS(catalog_map("mystery", c), Error);
}

TEST_CASE("polar pipeline") {
  CorpusEntry dyn = load("dyn-polar");
  const JetContext& c = dyn.system->ctx();
  PointMap polar = catalog_map("polar", c);
  auto r = decouple_pipeline(*dyn.system, {c.parse("x"), c.parse("y")}, polar);
  CHECK(r.check.decoupled);
  REQUIRE(r.rows.size() == 2);
  const JetContext& t = polar.target;
  CHECK(is_zero(r.rows[0] - t.parse("r_t - r*F(r^2, t)")));
  CHECK(is_zero(r.rows[1] - t.parse("th_t - G(r*cos(th), r*sin(th), t)")));
}

TEST_CASE("branch detection on the reaction-diffusion system") {
  CorpusEntry rd = load("reaction-diffusion");
  auto certs = detect_decouplable(rd.system, rd.ansatz.at("xi0").decoupling());
  REQUIRE(certs.size() == 2);
  for (const auto& cert : certs) {
    if (cert.branch == "beta2=0") {
      CHECK(cert.status == "pruned");
      CHECK_FALSE(cert.certificate.empty());
    } else {
      CHECK(cert.status == "verified");
      const JetContext& c = rd.system->ctx();
      REQUIRE(cert.values.count(c.parse("E")));
      CHECK(is_zero(cert.values.at(c.parse("E")) - c.parse("D")));
    }
  }
}

TEST_CASE("candidate verification") {
  CorpusEntry heat = load("heat");
  auto certs = detect_decouplable(heat.system, heat.ansatz.at("cand").decoupling());
  REQUIRE(certs.size() == 1);
  CHECK(certs[0].branch == "candidate");
  CHECK(certs[0].status == "verified");
}
