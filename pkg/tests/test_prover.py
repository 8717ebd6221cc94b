import pytest
from hypothesis import given, strategies as st

from conftest import formulas
from intelim import prover
from intelim.prover import (
    BudgetExhausted, CertificateError, Provable, RefutedClassical, RefutedIntuitionistic, SearchBudget,
    Unprovable, decide, prove_classical, prove_intuitionistic,
)
from intelim.rulegen import builtin_ruleset
from intelim.semantics import classically_valid, eval2, find_kripke_countermodel, kripke_refutes
from intelim.sequent import Fail, Sequent, check_proof, parse_sequent as S

LS = builtin_ruleset("LS")
LS1 = builtin_ruleset("LS-single")
LSC = builtin_ruleset("LS-single-classical")


def _verify(res, s, rs):
    if isinstance(res, Provable):
        assert res.proof.conclusion == s and check_proof(res.proof, rs)
    elif isinstance(res, RefutedClassical):
        v = res.valuation
        assert all(eval2(f, v) for f in s.ante) and not any(eval2(f, v) for f in s.succ)
    elif isinstance(res, RefutedIntuitionistic):
        assert kripke_refutes(res.model, s) == res.world


@pytest.mark.parametrize("text", ["p|q => q|p", "p => (p|p)|(p|p)", "p, p|q => q|q", "p|p => p|(q|q)",
                                  "p, q, p|q =>"])
def test_intuitionistic_provable(text):
    s = S(text)
    r = prove_intuitionistic(s, LS1)
    assert isinstance(r, Provable)
    _verify(r, s, LS1)


def test_double_stroke_elimination_is_refuted_by_a_kripke_model():
    s = S("(p|p)|(p|p) => p")
    r = decide(s, LS1)
    assert isinstance(r, RefutedIntuitionistic)
    _verify(r, s, LS1)
    r2 = decide(s, LSC)
    assert isinstance(r2, Provable)
    _verify(r2, s, LSC)


def test_classical_refutation_in_single_regimes():
    s = S("p => q")
    assert isinstance(decide(s, LSC), RefutedClassical)
    assert isinstance(decide(s, LS1), RefutedIntuitionistic)


def test_multi_prover_and_regime_guards():
    s = S("=> p, p|p")
    r = prove_classical(s, LS)
    assert isinstance(r, Provable) and check_proof(r.proof, LS)
    with pytest.raises(ValueError):
        prove_classical(s, LS1)
    with pytest.raises(ValueError):
        prove_intuitionistic(s, LS1)
    with pytest.raises(ValueError):
        prove_intuitionistic(S("p => p"), LS)


def test_budget_exhaustion():
    s = S("(p|q)|(q|p) => (q|p)|(p|q)")
    r = decide(s, LSC, SearchBudget(3))
    # one-node intuitionistic pass overruns at 2, then the full pass at 4
    assert isinstance(r, BudgetExhausted) and r.expanded == 6
    with pytest.raises(ValueError):
        SearchBudget(0)


def test_budget_from_env(monkeypatch):
    monkeypatch.setenv("INTELIM_BUDGET", "17")
    assert SearchBudget.from_env().max_expanded == 17
    monkeypatch.delenv("INTELIM_BUDGET")
    assert SearchBudget.from_env(5).max_expanded == 5


def test_xor_identity_needs_non_atomic_axioms():
    # atomic axioms only: the xor rules alone cannot close p^q => p^q
    rs = builtin_ruleset("LS-xor-single")
    r = decide(S("p^q => p^q"), rs)
    assert isinstance(r, Unprovable) and r.fixpoint_checked
    assert isinstance(decide(S("p^q, p, q =>"), rs), Provable)


def test_rejected_certificate_raises(monkeypatch):
    monkeypatch.setattr(prover, "check_proof", lambda p, rs: Fail((), "forced"))
    with pytest.raises(CertificateError):
        prove_intuitionistic(S("p => p"), LS1)


ATOMS2 = ("p", "q")


@given(st.lists(formulas(atoms=ATOMS2, max_leaves=4), max_size=2), st.lists(formulas(atoms=ATOMS2, max_leaves=4),
                                                                             max_size=2))
def test_classical_prover_agrees_with_truth_tables(ante, succ):
    s = Sequent(tuple(ante), tuple(succ))
    r = prove_classical(s, LS)
    assert isinstance(r, Provable) == classically_valid(s)
    _verify(r, s, LS)


@given(st.lists(formulas(atoms=ATOMS2, max_leaves=4), max_size=2), formulas(atoms=ATOMS2, max_leaves=4))
def test_intuitionistic_results_are_certified(ante, c):
    s = Sequent(tuple(ante), (c,))
    r = decide(s, LS1)
    assert isinstance(r, (Provable, RefutedIntuitionistic))
    _verify(r, s, LS1)
    if isinstance(r, Provable):
        assert find_kripke_countermodel(s) is None
    r2 = decide(s, LSC)
    assert isinstance(r2, Provable) == classically_valid(s)
    _verify(r2, s, LSC)
