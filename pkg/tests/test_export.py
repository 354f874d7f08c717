import pytest
from hypothesis import given, settings

from molbisim.export import (
    ExportError,
    close,
    export,
    parse_smtlib,
    parse_tptp,
    roundtrip_ok,
    to_smtlib,
    to_tptp,
)
from molbisim.fol import Atom, Bottom, Const, Exists, Forall, Implies, Not, Var, st_translate
from molbisim.presets import PRESET_NAMES, preset
from molbisim.syntax import enumerate_formulas, parse

from test_fol import formulas

MODAL = preset("modal").C


def dia_p():
    return st_translate(parse("dia(p)", MODAL), ("x",), MODAL)


def test_tptp_golden(golden):
    assert export(dia_p(), "tptp", ("x",), "modal") == golden("st_dia_p.tptp")


def test_smtlib_golden(golden):
    assert export(dia_p(), "smtlib", ("x",), "modal") == golden("st_dia_p.smt2")


def test_bottom_exports():
    assert "fof(f1, axiom, $false)." in to_tptp(Bottom(), [])
    assert "(assert false)" in to_smtlib(Bottom(), [])


def test_goldens_reparse(golden):
    (name, role, f), = parse_tptp(golden("st_dia_p.tptp"))
    assert (name, role) == ("f1", "axiom")
    assert f == close(dia_p(), ("x",))
    decls, asserts = parse_smtlib(golden("st_dia_p.smt2"))
    assert asserts == [dia_p()]


def test_closure_binds_free_variables_outermost():
    f = Atom("r", (Var("x"), Var("y")))
    assert close(f, ("x",)) == Forall("x", Forall("y", f))


@pytest.mark.parametrize("text", [
    "fof(a, axiom, p(X).",
    "fof(a, axiom, p(X) &).",
    "cnf(a, axiom, p).",
    "% only a comment\n",
])
def test_tptp_parse_errors(text):
    with pytest.raises(ExportError):
        parse_tptp(text)


@pytest.mark.parametrize("text", ["(assert (p x)", "(assert (frob x))"])
def test_smtlib_parse_errors(text):
    with pytest.raises(ExportError):
        parse_smtlib(text)


def test_unknown_format():
    with pytest.raises(ExportError):
        export(Bottom(), "dimacs")


def test_constants_and_equality_roundtrip():
    f = Implies(Atom("=", (Const("c"), Var("x"))), Not(Exists("y", Atom("r", (Var("x"), Var("y"))))))
    assert roundtrip_ok(f, "tptp", ("x",))
    assert roundtrip_ok(f, "smtlib", ("x",))


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_random_formulas_roundtrip(f):
    free = sorted(f.free_vars)
    assert roundtrip_ok(f, "tptp", free)
    assert roundtrip_ok(f, "smtlib", free)


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_translations_roundtrip_at_depth_two(name):
    C = preset(name).C
    for phi in enumerate_formulas(C, 2, ("p",)):
        f = st_translate(phi, ("x",), C)
        assert roundtrip_ok(f, "tptp", ("x",)) and roundtrip_ok(f, "smtlib", ("x",))
