import pytest

import subsym


def test_context_algebra():
    c = subsym.Context(["x", "y"], ["u"])
    assert c.is_zero("sin(u)^2 + cos(u)^2 - 1")
    assert c.is_zero(c.total_derivative("x*u", "x") + " - (u + x*u_x)")
    assert c.normalize("(x + 1)^2 - x^2") == c.normalize("2*x + 1")
    assert c.is_zero(c.diff("u^3", "u") + " - 3*u^2")


def test_commutator_bracket():
    c = subsym.Context(["x", "y"], ["u"])
    k = c.commutator(["u^2"], ["u_x"])
    lhs = c.apply(k, "u_y")
    rhs = "(" + c.apply(["u^2"], c.apply(["u_x"], "u_y")) + ") - (" + c.apply(["u_x"], c.apply(["u^2"], "u_y")) + ")"
    assert c.is_zero(lhs + " - (" + rhs + ")")


def test_corpus_round():
    ids = subsym.corpus_ids()
    assert "sine-gordon" in ids and "hopf" in ids
    for i in ids:
        sysm = subsym.load("corpus:" + i)
        assert all(ok for _, ok, _ in sysm.verify()), i


def test_sine_gordon():
    sg = subsym.load("corpus:sine-gordon")
    assert sg.check_symmetry("X1")["holds"]
    assert not sg.check_symmetry("Y1")["holds"]
    assert sg.check_subsystem_symmetry("Y1", "v*D2 - sin(u)*D1")["holds"]
    assert sg.classify("Y1", "S") == "SubsystemSymmetry"
    law = sg.verify_cl("sgcl")
    assert not law["trivial"]
    assert sg.deform("X1", "sgcl")["trivial"]
    f = sg.inverse_deform("sgcl", "sgcl")
    c = subsym.Context(["x", "t"], ["u", "v"])
    assert c.is_zero(f[0] + " + cot(u)")


def test_errors():
    hopf = subsym.load("corpus:hopf")
    with pytest.raises(subsym.RankDeficient):
        hopf.inverse_deform("A", "P")
    with pytest.raises(subsym.NotAConservationLaw):
        hopf.verify_cl(["u", "u"])
    c = subsym.Context(["x"], ["u"])
    with pytest.raises(subsym.ParseError):
        c.normalize("x +")
    with pytest.raises(subsym.UnknownSymbol):
        c.normalize("w")
    with pytest.raises(subsym.Error):
        subsym.load("corpus:missing")


def test_inline_system():
    text = "subsym 1\nid = tr\ntitle = transport\n[vars]\nx t\n[deps]\nu\n[equations]\nu_t + u_x\n[fields]\nT.xi = 1, 0\n"
    s = subsym.parse_system(text)
    assert s.id == "tr"
    assert s.check_symmetry("T")["holds"]
    assert s.check_symmetry(["u"])["holds"]


def test_telegraph_catalog():
    cases = subsym.telegraph_catalog()
    assert len(cases) == 9
    assert all(c["law_verified"] for c in cases if not c["name"].startswith("tanu-") or "derived" in c["name"])
