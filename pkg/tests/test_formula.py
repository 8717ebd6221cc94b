import pytest
from hypothesis import given

from conftest import BINARY, formulas
from intelim.formula import (
    STANDARD, Comp, Falsum, Meta, ParseError, SchemaError, Signature, Var, check_well_formed,
    connectives, match, metavariables, parse_formula, parse_schema, render_formula, size, subformulas,
    substitute, variables,
)


def test_parse_nested_stroke():
    f = parse_formula("(p|p)|(p|p)")
    pp = Comp("nand", (Var("p"), Var("p")))
    assert f == Comp("nand", (pp, pp))
    assert render_formula(f) == "((p | p) | (p | p))"


def test_longest_symbol_wins():
    assert parse_formula("p||q") == Comp("hp", (Var("p"), Var("q")))
    assert parse_formula("p|q") == Comp("nand", (Var("p"), Var("q")))


def test_unary_binds_tightly():
    assert parse_formula("~p & q") == Comp("and", (Comp("not", (Var("p"),)), Var("q")))


@pytest.mark.parametrize("text, pos", [("p |", 3), ("(p | q", 6), ("p | q | r", 6), ("p $ q", 2)])
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(ParseError) as e:
        parse_formula(text)
    assert e.value.pos == pos


def test_metavariables_only_in_schemas():
    with pytest.raises(ParseError):
        parse_formula("?A | p")
    s = parse_schema("?A | ?B")
    assert metavariables(s) == {"A", "B"}


def test_match_and_substitute():
    s = parse_schema("?A | ?A")
    assert match(s, parse_formula("(p|q) | (p|q)")) == {"A": parse_formula("p|q")}
    assert match(s, parse_formula("p | q")) is None
    with pytest.raises(SchemaError):
        substitute(s, {})


def test_restricted_signature_rejects_foreign_connective():
    sig = STANDARD.restrict(["nand"])
    with pytest.raises(ParseError):
        parse_formula("p & q", sig)
    with pytest.raises(Exception):
        check_well_formed(Comp("and", (Var("p"), Var("q"))), sig)


def test_falsum_is_a_singleton():
    assert Falsum is Falsum
    assert size(Falsum) == 0


def test_signature_json_round_trip():
    assert Signature.from_json(STANDARD.to_json()) == STANDARD


@given(formulas(BINARY + ("not",)))
def test_render_parse_round_trip(f):
    assert parse_formula(render_formula(f)) == f


@given(formulas(BINARY))
def test_size_counts_connectives(f):
    text = render_formula(f)
    assert size(f) == sum(1 for g in subformulas(f) if isinstance(g, Comp))
    assert variables(f) <= set("pqrs")
    assert connectives(f) <= set(BINARY)
    assert len(text) >= size(f)


@given(formulas(("nand",)), formulas(("nand",)))
def test_substitution_inverts_matching(a, b):
    s = parse_schema("?A | ?B")
    f = substitute(s, {"A": a, "B": b})
    assert match(s, f) == {"A": a, "B": b}
    assert isinstance(Meta("A"), Meta)
