import itertools

import pytest
from hypothesis import given, strategies as st

from conftest import formulas
from intelim.formula import parse_formula as F
from intelim.rulegen import BUILTIN_TABLES, builtin_ruleset, classical_rule, generate_sequent_rules
from intelim.semantics import (
    CONJUNCTIVE, DISJUNCTIVE, TWO_VALUED, KripkeModel, Matrix, SemanticsError, eval2, eval_matrix,
    find_classical_refutation, find_kripke_countermodel, find_refuting_valuation, kripke_forces,
    kripke_refutes, load_matrix, rule_matrix_sound, sequent_holds_ordered, small_models, three_valued,
)
from intelim.sequent import Sequent, parse_sequent as S

M3 = three_valued()
KRIPKE_CONNS = ("nand", "hp", "nor", "not", "and", "or", "imp")


def test_three_valued_stroke_table():
    # rows A, columns B, values bot < I < top
    expected = [["top", "top", "top"], ["top", "bot", "bot"], ["top", "bot", "bot"]]
    for (i, a), (j, b) in itertools.product(enumerate(M3.values), repeat=2):
        assert eval_matrix(M3, {"a": a, "b": b}, F("a|b")) == expected[i][j]
    assert M3.values == ("bot", "I", "top") and M3.designated == {"top"}


def test_double_stroke_is_refuted_at_the_middle_value():
    s = S("(p|p)|(p|p) => p")
    assert not sequent_holds_ordered(M3, {"p": "I"}, s)
    assert find_refuting_valuation(M3, s) == {"p": "I"}


def test_empty_succedent_holds_only_with_a_bottom_antecedent():
    assert sequent_holds_ordered(M3, {"p": "bot"}, S("p =>"))
    assert not sequent_holds_ordered(M3, {"p": "I"}, S("p =>"))


def test_single_stroke_rules_sound_in_three_valued_matrix():
    for r in builtin_ruleset("LS-single").sequent_rules:
        assert rule_matrix_sound(M3, r) is None, r.name


def test_classical_rule_fails_at_middle_value():
    cx = rule_matrix_sound(M3, classical_rule("nand", builtin_ruleset("LS-single").signature))
    assert cx is not None and cx.valuation == {"A": "I"}


@pytest.mark.parametrize("conn", sorted(BUILTIN_TABLES))
def test_generated_rules_sound_two_valued(conn):
    for r in generate_sequent_rules(BUILTIN_TABLES[conn]):
        assert rule_matrix_sound(TWO_VALUED, r) is None


def test_matrix_validation():
    with pytest.raises(SemanticsError):
        Matrix("bad", ("a", "b"), frozenset({"c"}), {})
    with pytest.raises(SemanticsError):
        Matrix("bad", ("a", "b"), frozenset({"b"}), {"nand": {("a", "a"): "a"}})
    assert load_matrix("builtin:3val") is M3
    with pytest.raises(OSError):
        load_matrix("/nonexistent.json")


def _force(m: KripkeModel, w, f) -> bool:
    """Textbook forcing clauses, evaluated without memoization."""
    up = [u for u in m.worlds if (w, u) in m.order]
    if f.__class__.__name__ == "Var":
        return f.name in m.val[w]
    c, args = f.conn, f.args
    if c in ("nand",) or (c == "hp" and m.hp_reading == CONJUNCTIVE):
        return all(not (_force(m, u, args[0]) and _force(m, u, args[1])) for u in up)
    if c == "hp":
        return any(all(not _force(m, u, a) for u in up) for a in args)
    if c == "nor":
        return all(not _force(m, u, args[0]) and not _force(m, u, args[1]) for u in up)
    if c == "not":
        return all(not _force(m, u, args[0]) for u in up)
    if c == "and":
        return _force(m, w, args[0]) and _force(m, w, args[1])
    if c == "or":
        return _force(m, w, args[0]) or _force(m, w, args[1])
    if c == "imp":
        return all(not _force(m, u, args[0]) or _force(m, u, args[1]) for u in up)
    raise AssertionError(c)


MODELS = list(small_models(("p", "q"), max_worlds=3))


@given(st.sampled_from(MODELS), formulas(KRIPKE_CONNS, atoms=("p", "q"), max_leaves=5),
       st.sampled_from((DISJUNCTIVE, CONJUNCTIVE)))
def test_forcing_matches_textbook_clauses(m, f, reading):
    m = m.with_reading(reading)
    for w in m.worlds:
        assert kripke_forces(m, w, f) == _force(m, w, f)


@given(st.sampled_from(MODELS), formulas(KRIPKE_CONNS, atoms=("p", "q"), max_leaves=6))
def test_forcing_is_monotone(m, f):
    for w, u in m.order:
        if kripke_forces(m, w, f):
            assert kripke_forces(m, u, f)


def test_one_world_models_are_classical():
    for m in small_models(("p", "q"), max_worlds=1):
        v = {a: a in m.val["w0"] for a in ("p", "q")}
        for text in ("p|q", "(p|p)|(p|p)", "p->q", "~(p&q)", "p!q", "p||q"):
            assert kripke_forces(m, "w0", F(text)) == eval2(F(text), v)


def test_model_validation():
    with pytest.raises(SemanticsError):
        KripkeModel.build(["a", "b"], [("a", "b")], {"a": ["p"], "b": []})
    with pytest.raises(SemanticsError):
        KripkeModel.build([], [], {})
    m = KripkeModel.build(["a", "b", "c"], [("a", "b"), ("b", "c")], {"c": ["p"]})
    assert ("a", "c") in m.order
    assert KripkeModel.from_json(m.to_json()) == m


@pytest.mark.parametrize("text", ["(p|p)|(p|p) => p", "=> p+(p|p)", "(p->q)->p => p"])
def test_countermodels_refute(text):
    s = S(text)
    m = find_kripke_countermodel(s)
    assert m is not None and kripke_refutes(m, s) == "w0"


@pytest.mark.parametrize("text", ["p|q => q|p", "p => (p|p)|(p|p)", "p, p|q => q|q"])
def test_no_countermodel_for_valid(text):
    assert find_kripke_countermodel(S(text)) is None


@given(formulas(("nand",), atoms=("p", "q", "r"), max_leaves=5), formulas(("nand",), atoms=("p", "q"), max_leaves=4))
def test_countermodel_search_is_sound(a, b):
    s = Sequent((a,), (b,))
    m = find_kripke_countermodel(s)
    if m is not None:
        m.validate()
        assert kripke_refutes(m, s) is not None
    else:
        assert find_classical_refutation(s) is None
