"""Acceptance criteria 1-7.

Each test records one PASS/FAIL line in ``conftest.ACCEPTANCE``; the lines are
printed in the terminal summary.  Run this file directly for just the seven
lines.
"""
import random
import sys
import time
from collections import Counter
from contextlib import contextmanager
from functools import lru_cache

import pytest

from conftest import ACCEPTANCE, golden_by_name, load_golden, nd_displays, seq_displays
from intelim.corpus import CorpusConfig, provable_corpus, random_formula, redex_corpus
from intelim.formula import Comp, Falsum, Var, variables
from intelim.nd import Infer, _postorder, _open_map, check_derivation, derivation_from_json, open_formulas
from intelim.normalize import atomize_classical, default_rules, maximal_occurrences, normalize, reduce_at
from intelim.prover import (
    AUDIT, Provable, RefutedClassical, RefutedIntuitionistic, Unprovable, decide, prove_classical,
)
from intelim.rulegen import (
    BUILTIN_NAMES, BUILTIN_TABLES, CLASSICAL_ELIM, builtin_ruleset, classical_rule, generate_sequent_rules,
    ruleset_for_connective, split_multi_right_premises,
)
from intelim.semantics import (
    CONJUNCTIVE, DISJUNCTIVE, TWO_VALUED, KripkeModel, Forcing, find_classical_refutation,
    find_refuting_valuation, kripke_refutes, rule_matrix_sound, sequent_holds_ordered, three_valued,
)
from intelim.sequent import Sequent, check_proof, parse_sequent as S
from intelim.translate import classical_shift, classical_unshift, nd_to_sequent, sequent_to_nd

BUDGET_S = 10.0
B = builtin_ruleset


@contextmanager
def criterion(n: int, what: str):
    """Times the body and records the PASS/FAIL line; ``info`` collects
    details for the line."""
    info: list[str] = []
    t0 = time.perf_counter()
    try:
        yield info
    except Exception as e:
        ACCEPTANCE[n] = f"FAIL criterion {n}: {what}: {type(e).__name__}: {str(e)[:300]}"
        raise
    dt = time.perf_counter() - t0
    detail = "; ".join(info + [f"{dt:.1f}s"])
    if dt >= BUDGET_S:
        ACCEPTANCE[n] = f"FAIL criterion {n}: {what} ({detail}; over the {BUDGET_S:.0f}s budget)"
        pytest.fail(ACCEPTANCE[n])
    ACCEPTANCE[n] = f"PASS criterion {n}: {what} ({detail})"


def _classically_valid_node(ante, succ) -> bool:
    return find_classical_refutation(Sequent(ante, succ)) is None


# --------------------------------------------------------------------------
# 1, 2: generated rules against checked-in displays


def test_criterion_1_rule_display_goldens():
    gold = load_golden("rule_displays.json")
    T = BUILTIN_TABLES
    with criterion(1, "generated rule displays equal the goldens up to metavariable renaming") as info:
        n = 0
        for key, conn in [("multi_nand", "nand"), ("multi_nor", "nor"), ("multi_xor", "xor")]:
            want = golden_by_name(gold["sequent"][key])
            assert seq_displays(generate_sequent_rules(T[conn])) == want, key
            n += len(want)
        for key, conn in [("single_nand", "nand"), ("single_nor", "nor")]:
            want = golden_by_name(gold["sequent"][key])
            rs = ruleset_for_connective(T[conn], single=True)
            assert seq_displays(r for r in rs.sequent_rules if r.name in want) == want, key
            n += len(want)
        want = golden_by_name(gold["sequent"]["multi_xor_split"])
        assert seq_displays(split_multi_right_premises(generate_sequent_rules(T["xor"])[0])) == want
        n += len(want)
        for key in ("NS", "NSm", "NSC"):
            want = golden_by_name(gold["nd"][key])
            got = nd_displays(r for r in B(key).nd_rules if r.name in want)
            assert got == want, key
            n += len(want)
        info.append(f"{n} rules")


def test_criterion_2_lk_recovery():
    gold = golden_by_name(load_golden("rule_displays.json")["sequent"]["lk"])
    with criterion(2, "multi-succedent rules for ~ & + -> are exactly LK") as info:
        rules = [r for c in ("not", "and", "or", "imp") for r in generate_sequent_rules(BUILTIN_TABLES[c])]
        assert seq_displays(rules) == gold
        info.append(", ".join(sorted(gold)))


# --------------------------------------------------------------------------
# 3: provability facts, each with a re-checked certificate


def _proved(text, calc):
    s, rs = S(text), B(calc)
    r = decide(s, rs)
    assert isinstance(r, Provable), f"{calc}: {text}: {r}"
    assert r.proof.conclusion == s and check_proof(r.proof, rs)
    return r


def _kripke_refuted(text, calc):
    s = S(text)
    r = decide(s, B(calc))
    assert isinstance(r, RefutedIntuitionistic), f"{calc}: {text}: {r}"
    r.model.validate()
    assert kripke_refutes(r.model, s) is not None
    return r


def test_criterion_3_provability_facts():
    with criterion(3, "provability facts (a)-(g)") as info:
        for text in ("p|q => ~(p&q)", "~(p&q) => p|q"):
            _proved(text, "LK-core+LS")  # (a)
            _proved(text, "LJ-core+LS-single")  # (b)
        _kripke_refuted("(p|p)|(p|p) => p", "LS-single")  # (c)
        m3 = three_valued()
        s = S("(p|p)|(p|p) => p")
        assert find_refuting_valuation(m3, s) == {"p": "I"}
        assert not sequent_holds_ordered(m3, {"p": "I"}, s)
        _proved("(p|p)|(p|p) => p", "LS-single-classical")  # (d)
        r = decide(S("p||q => p||q"), B("HP"))  # (e)
        assert isinstance(r, Unprovable) and r.fixpoint_checked
        _proved("p||q => p||q", "HP-fixed")
        _proved("p||q => p|q", "LS-single+HP")  # (f)
        _kripke_refuted("p|q => p||q", "LS-single+HP")
        _kripke_refuted("p||q => ~p + ~q", "LJ-core+HP")  # (g)
        info.append("5 proofs kernel-checked twice, 3 Kripke countermodels re-verified, "
                    "HP search exhausted with fixpoint agreement")


# --------------------------------------------------------------------------
# 4: matrix soundness


def test_criterion_4_matrix_soundness():
    with criterion(4, "matrix soundness of generated rules") as info:
        m3 = three_valued()
        ls1 = B("LS-single")
        for r in ls1.sequent_rules:
            assert rule_matrix_sound(m3, r) is None, r.name
        cx = rule_matrix_sound(m3, classical_rule("nand", ls1.signature))
        assert cx is not None and cx.valuation == {"A": "I"}
        seen = {}
        for name in BUILTIN_NAMES:
            for r in B(name).sequent_rules:
                seen.setdefault((r.name, r), r)
        for t in BUILTIN_TABLES.values():
            for r in generate_sequent_rules(t):
                seen.setdefault((r.name, r), r)
        bad = [r.name for r in seen.values() if rule_matrix_sound(TWO_VALUED, r) is not None]
        assert not bad, bad
        info.append(f"{len(ls1.sequent_rules)} LS' rules sound on the three-valued matrix, |L_C refuted at A=I, "
                    f"{len(seen)} rules sound on the two-valued matrix")


# --------------------------------------------------------------------------
# 5: translation round trips


def _uses_classical(s, p):
    return "|L_C" in p.rules_used()


@lru_cache(maxsize=None)
def _corpora():
    plain = provable_corpus(B("LS-single"), 100, CorpusConfig(seed=11))
    classical = provable_corpus(B("LS-single-classical"), 100, CorpusConfig(seed=11, atomic_goal=0.7),
                                keep=_uses_classical)
    return plain, classical


def _ops(s: Sequent) -> int:
    def count(f):
        return 0 if isinstance(f, Var) else 1 + sum(count(a) for a in f.args)
    return sum(count(f) for f in (*s.ante, *s.succ))


def _is_self_stroke(f) -> bool:
    return isinstance(f, Comp) and f.conn == "nand" and f.args[0] == f.args[1]


def test_criterion_5_translation_round_trips():
    with criterion(5, "sequent/ND translations and classical shift round trips") as info:
        plain, classical = _corpora()
        ls, lsc = B("LS"), B("LS-single-classical")
        shifted = 0
        for calc, nd_name, corpus in (("LS-single", "NS", plain), ("LS-single-classical", "NSC", classical)):
            rs, nd = B(calc), B(nd_name)
            for s, p in corpus:
                assert len(s.variables()) <= 4 and _ops(s) <= 12
                d = sequent_to_nd(p, nd, check=False)
                assert check_derivation(d, nd), s
                assert not (open_formulas(d) - Counter(s.ante)), s
                assert d.conclusion == (s.succ[0] if s.succ else Falsum)
                q = nd_to_sequent(d, nd, check=False)
                assert check_proof(q, rs), s
                assert q.conclusion.succ == s.succ and not (Counter(q.conclusion.ante) - Counter(s.ante)), s
                negs = [f for f in s.ante if _is_self_stroke(f)]
                sh = classical_shift(p, negs, check=False)
                assert check_proof(sh, ls), s
                un = classical_unshift(sh, [f.args[0] for f in negs], list(s.succ), check=False)
                assert check_proof(un, lsc) and un.conclusion == s, s
                shifted += bool(negs)
        info.append(f"{len(plain)} LS' + {len(classical)} LS'_C proofs (all LS'_C ones use |L_C), "
                    f"{shifted} with a shifted negation")


# --------------------------------------------------------------------------
# 6: normalization


def _reductio_conclusions(d, kinds):
    return [n.conclusion for n in _postorder(d) if isinstance(n, Infer) and kinds[n.rule] == CLASSICAL_ELIM]


def _node_sequents(d):
    opens = _open_map(d)
    for n in _postorder(d):
        c = n.conclusion
        succ = [] if c is Falsum else list(c) if isinstance(c, tuple) else [c]
        yield list(opens[id(n)].values()), succ


def test_criterion_6_normalization():
    with criterion(6, "normalization and classical atomization") as info:
        g = load_golden("reductions.json")["stroke_redex"]
        d = derivation_from_json(g["input"])
        occs = maximal_occurrences(d)
        assert len(occs) == 1
        assert reduce_at(d, occs[0]) == derivation_from_json(g["contractum"])

        rs = default_rules()
        redexes = redex_corpus(100, seed=0)
        assert len(redexes) >= 100
        for d in redexes:
            assert check_derivation(d, rs) and maximal_occurrences(d, rs)
            out = normalize(d, rs)  # raises past the cap
            assert check_derivation(out, rs)
            assert maximal_occurrences(out, rs) == []
            assert out.conclusion == d.conclusion
            assert not (open_formulas(out) - open_formulas(d))

        nsc = B("NSC")
        kinds = {r.name: r.kind for r in nsc.nd_rules}
        _, classical = _corpora()
        compound = checked = 0
        for s, p in classical:
            d = sequent_to_nd(p, nsc, check=False)
            out = atomize_classical(d)
            assert check_derivation(out, nsc)
            assert all(not isinstance(c, Comp) for c in _reductio_conclusions(out, kinds))
            assert out.conclusion == d.conclusion and not (open_formulas(out) - open_formulas(d))
            compound += any(isinstance(c, Comp) for c in _reductio_conclusions(d, kinds))
            for ante, succ in set((tuple(a), tuple(c)) for a, c in _node_sequents(out)):
                assert len(set().union(*(variables(f) for f in ante + succ))) <= 4
                assert _classically_valid_node(ante, succ), (ante, succ)
                checked += 1
        assert compound > 0
        info.append(f"golden contractum, {len(redexes)} redex derivations normalized, {len(classical)} "
                    f"classical derivations atomized ({compound} had compound reductio conclusions, "
                    f"{checked} node sequents two-valued valid)")


# --------------------------------------------------------------------------
# 7: property suites


def _random_model(rng: random.Random, atoms, reading) -> KripkeModel:
    n = rng.randint(1, 4)
    worlds = [f"w{i}" for i in range(n)]
    pairs = [(worlds[i], worlds[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
    up = KripkeModel.build(worlds, pairs, {}).order
    val: dict[str, set] = {w: set() for w in worlds}
    for a in atoms:
        for w in worlds:
            if rng.random() < 0.3:
                for (x, y) in up:
                    if x == w:
                        val[y].add(a)
    return KripkeModel.build(worlds, pairs, val, reading)


def _kripke_monotonicity(cases: int, seed: int = 7) -> int:
    rng = random.Random(seed)
    atoms = ("p", "q", "r")
    conns = ("nand", "hp", "nor", "not", "and", "or", "imp")
    done = 0
    while done < cases:
        m = _random_model(rng, atoms, rng.choice((DISJUNCTIVE, CONJUNCTIVE)))
        force = Forcing(m)
        for _ in range(25):
            f = random_formula(rng, conns, atoms, rng.randint(0, 6))
            for w, u in m.order:
                assert not force(w, f) or force(u, f), (m, f, w, u)
            done += 1
    return done


def _proof_nodes(p):
    seen, stack = set(), [p]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        yield n
        stack.extend(n.children)


def _nand_formulas(max_ops: int):
    by = [[Var("p"), Var("q")]]
    for k in range(1, max_ops + 1):
        by.append([Comp("nand", (a, b)) for i in range(k) for a in by[i] for b in by[k - 1 - i]])
    return by


def _truth_mask(f, memo) -> int:
    # rows are the four valuations of (p, q); bit i set when f is true in row i
    m = memo.get(f)
    if m is None:
        if isinstance(f, Var):
            m = 0b1100 if f.name == "p" else 0b1010
        else:
            m = ~(_truth_mask(f.args[0], memo) & _truth_mask(f.args[1], memo)) & 0b1111
        memo[f] = m
    return m


def test_criterion_7_property_suites():
    plain, classical = _corpora()  # shared with criterion 5, which times their construction
    with criterion(7, "randomized and exhaustive property suites") as info:
        cases = _kripke_monotonicity(10_000)

        ls1, lsc, ls = B("LS-single"), B("LS-single-classical"), B("LS")
        proofs = [(p, ls1) for _, p in plain] + [(p, lsc) for _, p in classical]
        proofs += [(classical_shift(p, [f for f in s.ante if _is_self_stroke(f)]), ls) for s, p in classical]
        node_seqs = set()
        for p, rs in proofs:
            assert check_proof(p, rs)
            node_seqs.update(n.conclusion for n in _proof_nodes(p))
        for s in node_seqs:
            assert len(s.variables()) <= 4 and find_classical_refutation(s) is None, s

        before = AUDIT.calls
        by = _nand_formulas(6)
        memo: dict = {}
        sides = [(None, 0)] + [(f, k) for k, fs in enumerate(by) for f in fs]
        t0, n = time.perf_counter(), 0
        for a, ka in sides:
            for c, kc in sides:
                if ka + kc > 6:
                    continue
                s = Sequent([a] if a else [], [c] if c else [])
                left = _truth_mask(a, memo) if a else 0b1111
                right = _truth_mask(c, memo) if c else 0
                valid = left & ~right & 0b1111 == 0
                r = prove_classical(s, ls)
                assert isinstance(r, Provable if valid else RefutedClassical), (s, r)
                n += 1
        agree = time.perf_counter() - t0
        assert AUDIT.calls - before == n
        a = AUDIT
        assert a.verified + a.unverifiable + a.rejected == a.calls
        info.append(f"{cases} Kripke monotonicity cases, {len(node_seqs)} proof-node sequents classically valid, "
                    f"prove_classical agrees with truth tables on all {n} sequents over p,q with at most one "
                    f"formula per side and at most 6 strokes ({agree:.1f}s), audit {a.calls} calls "
                    f"{a.verified} verified {a.unverifiable} uncertified {a.rejected} rejected")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider", "-W", "ignore::pytest.PytestAssertRewriteWarning"]))
