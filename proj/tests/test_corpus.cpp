#include "doctest.h"

#include "subsym/corpus.hpp"
#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"

using namespace subsym;

TEST_CASE("built-in corpus loads") {
  auto ids = corpus_ids();
  CHECK(ids.size() >= 14);
  for (const auto& id : ids) {
    CorpusEntry e = load(id);
    CHECK(e.id == id);
    CHECK(e.version == 1);
    CHECK_FALSE(e.title.empty());
    CHECK(e.system->size() > 0);
  }
  CHECK_THROWS_AS(load("no-such-entry"), Error);
}

TEST_CASE("every corpus expectation holds") {
  for (const auto& id : corpus_ids()) {
    CorpusEntry e = load(id);
    for (const auto& r : verify_expectations(e)) CHECK_MESSAGE(r.pass, id << ": " << r.line << " -- " << r.detail);
  }
}

TEST_CASE("minimal entry") {
  const char* text =
      "subsym 1\n"
      "id = mini\n"
      "title = transport\n"
      "[vars]\nx t\n[deps]\nu\n"
      "[equations]\nu_t + u_x  # transport\n"
      "[fields]\nT.xi = 1, 0\nS.char = u\n"
      "[laws]\nM = u, u\n"
      "[expect]\nsymmetry T\nsymmetry S\ncl M\nnot trivial M\n";
  CorpusEntry e = parse_entry(text);
  CHECK(e.id == "mini");
  CHECK(is_zero(e.field("T").alpha[0] + e.system->ctx().parse("u_x")));
  for (const auto& r : verify_expectations(e)) CHECK_MESSAGE(r.pass, r.line);
  auto neg = verify_expectation(e, "not symmetry T");
  CHECK_FALSE(neg.pass);
}

TEST_CASE("format errors") {
  CHECK_THROWS_AS(parse_entry("subsym 2\nid = a\n"), FormatError);
  CHECK_THROWS_AS(parse_entry("subsym 1\nid = a\n[vars]\nx\n[deps]\nu\n[equations]\nu_x\n[bogus]\n"), FormatError);
  CHECK_THROWS_AS(parse_entry("subsym 1\nid = a\n[vars]\nx\n[deps]\nu\n[equations]\nu_x +\n"), ParseError);
  CHECK_THROWS_AS(parse_entry("subsym 1\nid = a\n[vars]\nx\n[deps]\nu\n[equations]\nw_x\n"), FormatError);
}

TEST_CASE("inline multipliers and splitting") {
  CorpusEntry sg = load("sine-gordon");
  SubSystem s = parse_multipliers("v*D2 - sin(u)*D1", sg.system);
  REQUIRE(s.rows() == 1);
  CHECK(is_zero(eval_subsystem(s)[0] - eval_subsystem(sg.subsystem("S"))[0]));
  SubSystem two = parse_multipliers("D1 ; Dt*D2", sg.system);
  CHECK(two.rows() == 2);
  CHECK(split_top("a(b, c), d, (e, f)", ',') == std::vector<std::string>{"a(b, c)", "d", "(e, f)"});
}

TEST_CASE("system spec resolution") {
  CHECK(load_system("corpus:hopf").id == "hopf");
  CHECK_THROWS_AS(load_system("/nonexistent/file.subsym"), Error);
}
