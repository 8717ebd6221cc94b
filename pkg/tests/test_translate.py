from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from intelim.corpus import CorpusConfig, provable_corpus
from intelim.formula import Falsum, parse_formula as F
from intelim.nd import Assume, check_derivation, infer, open_formulas
from intelim.prover import Provable, decide
from intelim.rulegen import builtin_ruleset, derive_nd_rules
from intelim.sequent import Sequent, SequentProof, ax, check_proof, parse_sequent as S
from intelim.translate import (
    TranslationError, classical_shift, classical_unshift, negation_of, nd_to_sequent, sequent_to_nd,
)

LS = builtin_ruleset("LS")
LS1 = builtin_ruleset("LS-single")
LSC = builtin_ruleset("LS-single-classical")
NS = builtin_ruleset("NS")
NSC = builtin_ruleset("NSC")


def _sub(small: Counter, big: Counter) -> bool:
    return not (small - big)


def _round_trip(s, calc, nd):
    r = decide(s, calc)
    assert isinstance(r, Provable)
    d = sequent_to_nd(r.proof, nd)
    assert check_derivation(d, nd)
    assert _sub(open_formulas(d), Counter(s.ante))
    assert d.conclusion == (s.succ[0] if s.succ else Falsum)
    back = nd_to_sequent(d, nd)
    assert check_proof(back, calc)
    assert back.conclusion.succ == s.succ and _sub(Counter(back.conclusion.ante), Counter(s.ante))
    return d, back


@pytest.mark.parametrize("text", ["p|q => q|p", "p|q, p, q =>", "=> p|(p|p)", "p => (p|p)|(p|p)"])
def test_stroke_round_trip(text):
    _round_trip(S(text), LS1, NS)


def test_classical_round_trip():
    d, _ = _round_trip(S("(p|p)|(p|p) => p"), LSC, NSC)
    assert "|E_C" in {getattr(n, "rule", None) for n in _walk(d)}


def _walk(d):
    stack = [d]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(n.children)


@pytest.mark.parametrize("calc, text", [("LS-nor-single", "p!q => p!p"), ("LS-xor-single", "p^q, p, q =>"),
                                        ("LJ-core", "p & q => q + p"), ("LJ-core", "p -> q, q -> r => p -> r")])
def test_other_connectives_round_trip(calc, text):
    rs = builtin_ruleset(calc)
    _round_trip(S(text), rs, rs if rs.nd_rules else derive_nd_rules(rs))


def test_multi_regime_rejected():
    with pytest.raises(TranslationError):
        sequent_to_nd(ax(F("p")), LS)


def test_nd_with_unknown_rule_rejected():
    d = infer("magic", F("p"), [Assume(F("p"), 1)])
    with pytest.raises(TranslationError):
        nd_to_sequent(d, NS)


def test_negation_is_self_stroke():
    assert negation_of(LSC)(F("p")) == F("p|p")


def test_shift_and_unshift_round_trip():
    s = S("p|p => p|p")
    r = decide(s, LSC)
    shifted = classical_shift(r.proof, [F("p|p")])
    assert shifted.conclusion == S("=> p, p|p") and check_proof(shifted, LS)
    back = classical_unshift(shifted, [F("p")], [F("p|p")])
    assert back.conclusion == s and check_proof(back, LSC)


def test_unshift_with_empty_remainder():
    r = decide(S("=> p, p|p"), LS)
    back = classical_unshift(r.proof, [F("p"), F("p|p")], [])
    assert back.conclusion == S("p|p, (p|p)|(p|p) =>") and check_proof(back, LSC)


def test_unshift_guards():
    r = decide(S("=> p, p|p"), LS)
    with pytest.raises(TranslationError):
        classical_unshift(r.proof, [], [F("p"), F("p|p")])
    with pytest.raises(TranslationError):
        classical_unshift(r.proof, [F("q")], [F("p|p")])


def test_deep_proof_translates_without_recursion():
    a = F("p")
    cur = ax(a)
    for _ in range(5_000):
        cur = SequentProof(Sequent(cur.conclusion.ante + (a,), (a,)), "WL", (cur,))
        cur = SequentProof(Sequent((a,), (a,)), "CL", (cur,))
    d = sequent_to_nd(cur, NS)
    assert d == Assume(a, d.label)
    deep = Assume(a, 1)
    for _ in range(2_500):
        deep = infer("botI", a, [infer("|E", Falsum, [Assume(F("p|p"), 2), deep, Assume(a, 1)])])
    back = nd_to_sequent(deep, NS)
    assert check_proof(back, LS1) and back.height() > 5_000


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_random_corpus_round_trips(seed):
    for s, p in provable_corpus(LS1, 3, CorpusConfig(seed=seed)):
        d = sequent_to_nd(p, NS)
        assert _sub(open_formulas(d), Counter(s.ante))
        back = nd_to_sequent(d, NS)
        assert back.conclusion.succ == s.succ
