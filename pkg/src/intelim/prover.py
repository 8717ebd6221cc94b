"""Backward proof search with checkable certificates.

Multiple-succedent calculi are searched over set sequents, each rule applied
once with its principal formula removed.  Single-succedent calculi keep the
principal formula of a left rule in the premises and cut branches that
revisit a goal already on the path.  Both engines close branches only with
axioms on atoms (or on formulas whose connective has no rules in the
calculus).  Proofs are then rebuilt with explicit weakening and contraction
and re-checked by the kernel.  Countermodels are re-checked semantically.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Iterable

from .formula import Comp, Var, connectives, fkey, match, substitute
from .rulegen import MULTI, SINGLE, SINGLE_CLASSICAL, RuleSchema, RuleSet
from .semantics import (
    KRIPKE_CONNECTIVES, KripkeModel, SemanticsError, admissible_readings,
    eval2, find_classical_refutation, find_kripke_countermodel, kripke_refutes,
)
from .sequent import Sequent, SequentProof, check_proof, weaken_to

DEFAULT_BUDGET = 10 ** 6


@dataclass(frozen=True)
class SearchBudget:
    max_expanded: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.max_expanded <= 0:
            raise ValueError("budget must be positive")

    @classmethod
    def from_env(cls, default: int = DEFAULT_BUDGET) -> "SearchBudget":
        raw = os.environ.get("INTELIM_BUDGET")
        return cls(int(raw) if raw else default)


@dataclass(frozen=True)
class Provable:
    proof: SequentProof
    expanded: int = 0


@dataclass(frozen=True)
class RefutedClassical:
    valuation: dict = field(hash=False)
    expanded: int = 0


@dataclass(frozen=True)
class RefutedIntuitionistic:
    model: KripkeModel
    world: str
    expanded: int = 0


@dataclass(frozen=True)
class Unprovable:
    """Search space exhausted without a proof, but no countermodel exists in
    the available semantics.  ``goals`` is the number of goal sequents in the
    searched space; ``fixpoint_checked`` records that an independent
    least-fixpoint evaluation over that space agrees."""

    reason: str
    goals: int
    fixpoint_checked: bool
    expanded: int = 0


@dataclass(frozen=True)
class BudgetExhausted:
    expanded: int


ProofResult = Provable | RefutedClassical | RefutedIntuitionistic | Unprovable | BudgetExhausted


class _OutOfBudget(Exception):
    pass


# --------------------------------------------------------------------------
# rule indexing


@dataclass
class _Index:
    rs: RuleSet
    left: dict = field(default_factory=dict)   # connective -> rules with a left principal
    right: dict = field(default_factory=dict)  # connective -> rules with a right principal

    @classmethod
    def of(cls, rs: RuleSet) -> "_Index":
        ix = cls(rs)
        for r in rs.sequent_rules:
            if r.side == "structural" or r.is_cut:
                continue
            if len(r.conclusion.left) == 1 and not r.conclusion.right:
                p = r.conclusion.left[0]
                if isinstance(p, Comp):
                    ix.left.setdefault(p.conn, []).append(r)
            elif len(r.conclusion.right) == 1 and not r.conclusion.left:
                p = r.conclusion.right[0]
                key = p.conn if isinstance(p, Comp) else None
                ix.right.setdefault(key, []).append(r)
        return ix

    def opaque(self, f) -> bool:
        return isinstance(f, Var) or (f.conn not in self.left and f.conn not in self.right)

    def right_rules(self, f) -> list[RuleSchema]:
        out = list(self.right.get(f.conn, [])) if isinstance(f, Comp) else []
        return out + list(self.right.get(None, []))  # rules such as |L_C match any formula

    def left_rules(self, f) -> list[RuleSchema]:
        return list(self.left.get(f.conn, [])) if isinstance(f, Comp) else []


def _inst(fs, b):
    return tuple(substitute(f, b) for f in fs)


# --------------------------------------------------------------------------
# internal derivations over set sequents


@dataclass(frozen=True)
class _Step:
    kind: str  # "ax", "rule"
    ante: frozenset
    succ: tuple  # set succedent as a sorted tuple
    rule: RuleSchema | None = None
    principal: object = None
    binding: tuple = ()
    children: tuple = ()


def _sorted(fs: Iterable) -> tuple:
    return tuple(sorted(fs, key=fkey))


# --------------------------------------------------------------------------
# classical engine


class _Classical:
    def __init__(self, rs: RuleSet, budget: SearchBudget):
        self.ix = _Index.of(rs)
        self.budget = budget
        self.expanded = 0
        self.leaf = None  # a saturated open branch

    def tick(self):
        self.expanded += 1
        if self.expanded > self.budget.max_expanded:
            raise _OutOfBudget

    def prove(self, G: frozenset, D: frozenset):
        self.tick()
        for f in _sorted(G & D):
            if self.ix.opaque(f):
                return _Step("ax", G, _sorted(D), principal=f)
        for f in _sorted(G):
            if not self.ix.opaque(f):
                return self.expand(G, D, f, self.ix.left_rules(f), left=True)
        for f in _sorted(D):
            if not self.ix.opaque(f):
                rules = [r for r in self.ix.right_rules(f) if r.side == "right"]
                if rules:
                    return self.expand(G, D, f, rules, left=False)
        if self.leaf is None:
            self.leaf = (G, D)
        return None

    def expand(self, G, D, f, rules, left: bool):
        for r in rules:
            schema = r.conclusion.left[0] if left else r.conclusion.right[0]
            b = match(schema, f)
            if b is None:
                continue
            kids = []
            for p in r.premises:
                G2 = (G - {f} if left else G) | set(_inst(p.left, b))
                D2 = ((D if left else D - {f}) if p.context else frozenset()) | set(_inst(p.right, b))
                sub = self.prove(frozenset(G2), frozenset(D2))
                if sub is None:
                    break
                kids.append(sub)
            else:
                return _Step("rule", G, _sorted(D), r, f, tuple(sorted(b.items())), tuple(kids))
        if self.leaf is None:
            self.leaf = (G, D)
        return None


def _rebuild_classical(step: _Step) -> SequentProof:
    if step.kind == "ax":
        return weaken_to(SequentProof(Sequent((step.principal,), (step.principal,)), "ax"),
                         _sorted(step.ante), step.succ, single=False)
    r, f, b = step.rule, step.principal, dict(step.binding)
    left = bool(r.conclusion.left)
    G = _sorted(step.ante - {f}) if left else _sorted(step.ante)
    D = step.succ if left else tuple(x for x in step.succ if x != f)
    kids = []
    for p, child in zip(r.premises, step.children):
        target_l = G + _inst(p.left, b)
        target_r = (D if p.context else ()) + _inst(p.right, b)
        kids.append(weaken_to(_rebuild_classical(child), target_l, target_r, single=False))
    concl = Sequent(G + (f,), D) if left else Sequent(G, D + (f,))
    return SequentProof(concl, r.name, tuple(kids))


def _prove_classical(s: Sequent, rs: RuleSet, budget: SearchBudget | None = None) -> ProofResult:
    if rs.regime != MULTI:
        raise ValueError(f"{rs.name} is not a multiple-succedent calculus")
    budget = budget or SearchBudget()
    eng = _Classical(rs, budget)
    try:
        step = eng.prove(frozenset(s.ante), frozenset(s.succ))
    except _OutOfBudget:
        return BudgetExhausted(eng.expanded)
    if step is not None:
        proof = weaken_to(_rebuild_classical(step), s.ante, s.succ, single=False)
        proof = _contract_to(proof, s, single=False)
        return Provable(proof, eng.expanded)
    G, D = eng.leaf
    v = {x: (Var(x) in G) for x in s.variables()}
    refutes = all(eval2(f, v) for f in s.ante) and not any(eval2(f, v) for f in s.succ)
    if not refutes:
        v2 = find_classical_refutation(s)
        if v2 is None:
            return Unprovable("no cut-free proof with atomic axioms, yet the sequent is classically valid",
                              eng.expanded, False, eng.expanded)
        v = v2
    return RefutedClassical(dict(sorted(v.items())), eng.expanded)


# --------------------------------------------------------------------------
# single-succedent engine


@dataclass(frozen=True)
class _Option:
    rule: RuleSchema
    principal: object
    binding: tuple
    premises: tuple  # of (frozenset, formula or None)
    weaken_right: bool = False


class _Single:
    def __init__(self, rs: RuleSet, budget: SearchBudget):
        self.ix = _Index.of(rs)
        self.budget = budget
        self.expanded = 0
        self.proved: dict = {}
        self.failed: set = set()
        self.goals: set = set()

    def tick(self):
        self.expanded += 1
        if self.expanded > self.budget.max_expanded:
            raise _OutOfBudget

    def options(self, G: frozenset, C) -> list[_Option]:
        out: list[_Option] = []
        if C is not None:
            for r in self.ix.right_rules(C):
                b = match(r.conclusion.right[0], C)
                if b is None:
                    continue
                prem = tuple((frozenset(G | set(_inst(p.left, b))), (_inst(p.right, b) or (None,))[0])
                             for p in r.premises)
                out.append(_Option(r, C, tuple(sorted(b.items())), prem))
        for f in _sorted(G):
            for r in self.ix.left_rules(f):
                b = match(r.conclusion.left[0], f)
                if b is None:
                    continue
                prem = []
                for p in r.premises:
                    rhs = _inst(p.right, b)
                    c2 = C if p.context else (rhs[0] if rhs else None)
                    prem.append((frozenset(G | set(_inst(p.left, b))), c2))
                wr = not r.conclusion.context and C is not None
                out.append(_Option(r, f, tuple(sorted(b.items())), tuple(prem), wr))
        return out

    def axiom(self, G, C) -> bool:
        return C is not None and C in G and self.ix.opaque(C)

    def prove(self, G: frozenset, C, path: dict, depth: int):
        """Returns (step or None, lowest ancestor depth a loop check hit)."""
        goal = (G, C)
        self.goals.add(goal)
        if goal in self.proved:
            return self.proved[goal], depth + 1
        if goal in self.failed:
            return None, depth + 1
        if goal in path:
            return None, path[goal]
        self.tick()
        if self.axiom(G, C):
            step = _Step("ax", G, (C,), principal=C)
            self.proved[goal] = step
            return step, depth + 1
        path[goal] = depth
        low = depth + 1
        try:
            for opt in self.options(G, C):
                if any(pg == goal for pg in opt.premises):
                    continue
                kids = []
                for pg in opt.premises:
                    sub, l = self.prove(pg[0], pg[1], path, depth + 1)
                    low = min(low, l)
                    if sub is None:
                        break
                    kids.append(sub)
                else:
                    step = _Step("rule", G, (C,), opt.rule, opt.principal, opt.binding, tuple(kids))
                    self.proved[goal] = step
                    return step, low
        finally:
            del path[goal]
        if low >= depth:
            self.failed.add(goal)
        return None, low


def _rebuild_single(step: _Step, memo: dict | None = None) -> SequentProof:
    """Sequent proof of a search step; steps reached twice are rebuilt once,
    so the result shares those subproofs."""
    if memo is None:
        memo = {}
    if id(step) in memo:
        return memo[id(step)]
    out = _rebuild_single_node(step, memo)
    memo[id(step)] = out
    return out


def _rebuild_single_node(step: _Step, memo: dict) -> SequentProof:
    G = _sorted(step.ante)
    C = step.succ[0]
    succ = () if C is None else (C,)
    if step.kind == "ax":
        return weaken_to(SequentProof(Sequent((C,), (C,)), "ax"), G, succ, single=True)
    r, f, b = step.rule, step.principal, dict(step.binding)
    left = bool(r.conclusion.left)
    kids = []
    for p, child in zip(r.premises, step.children):
        sub = _rebuild_single(child, memo)
        target_r = succ if (left and p.context) else _inst(p.right, b)
        kids.append(weaken_to(sub, G + _inst(p.left, b), target_r, single=True))
    if not left:
        return SequentProof(Sequent(G, (f,)), r.name, tuple(kids))
    concl_succ = succ if r.conclusion.context else ()
    node = SequentProof(Sequent(G + (f,), concl_succ), r.name, tuple(kids))
    if concl_succ != succ:
        node = SequentProof(Sequent(node.conclusion.ante, succ), "WR'", (node,))
    # the principal was kept in the premises, so it now occurs twice
    return SequentProof(Sequent(G, succ), "CL", (node,))


def _contract_to(p: SequentProof, s: Sequent, single: bool) -> SequentProof:
    """Weaken and contract ``p`` so its end-sequent is exactly ``s``."""
    from collections import Counter

    have_l, want_l = Counter(p.conclusion.ante), Counter(s.ante)
    have_r, want_r = Counter(p.conclusion.succ), Counter(s.succ)
    cur = p
    for f in list(have_l):
        while have_l[f] > want_l[f]:
            ante = list(cur.conclusion.ante)
            ante.remove(f)
            cur = SequentProof(Sequent(ante, cur.conclusion.succ), "CL", (cur,))
            have_l[f] -= 1
    for f in list(have_r):
        while have_r[f] > want_r[f]:
            if single:
                raise ValueError("cannot contract on the right in a single-succedent calculus")
            succ = list(cur.conclusion.succ)
            succ.remove(f)
            cur = SequentProof(Sequent(cur.conclusion.ante, succ), "CR", (cur,))
            have_r[f] -= 1
    return weaken_to(cur, s.ante, s.succ, single)


class CertificateError(AssertionError):
    pass


def _certify_proof(p: SequentProof, rs: RuleSet) -> None:
    v = check_proof(p, rs)
    if not v:
        raise CertificateError(f"prover produced a proof the kernel rejects: {v}")


def fixpoint_provable(goals: Iterable, options_of, axiom) -> set:
    """Least fixpoint of provability over a finite AND/OR graph of goals."""
    goals = list(goals)
    opts = {g: options_of(*g) for g in goals}
    proved = {g for g in goals if axiom(*g)}
    changed = True
    while changed:
        changed = False
        for g in goals:
            if g in proved:
                continue
            for o in opts[g]:
                if all(pg in proved for pg in o.premises):
                    proved.add(g)
                    changed = True
                    break
    return proved


def _reachable(eng: _Single, root, limit: int = 200_000) -> set:
    seen = {root}
    stack = [root]
    while stack:
        g = stack.pop()
        for o in eng.options(*g):
            for pg in o.premises:
                if pg not in seen:
                    seen.add(pg)
                    if len(seen) > limit:
                        raise _OutOfBudget
                    stack.append(pg)
    return seen


def _prove_intuitionistic(s: Sequent, rs: RuleSet, budget: SearchBudget | None = None) -> ProofResult:
    if rs.regime == MULTI:
        raise ValueError(f"{rs.name} is a multiple-succedent calculus")
    if len(s.succ) > 1:
        raise ValueError("single-succedent calculi take at most one succedent formula")
    budget = budget or SearchBudget()
    if rs.regime == SINGLE_CLASSICAL:
        # a falsifying valuation is cheap to find and makes the search pointless
        v = find_classical_refutation(s)
        if v is not None:
            return RefutedClassical(dict(sorted(v.items())), 0)
    C = s.succ[0] if s.succ else None
    spent = 0
    if rs.regime == SINGLE_CLASSICAL:
        # classical steps blow proofs up; try without them on a slice of the budget
        plain = replace(rs, sequent_rules=tuple(r for r in rs.sequent_rules if r.side != "classical"),
                        regime=SINGLE)
        eng = _Single(plain, SearchBudget(max(1, budget.max_expanded // 10)))
        try:
            step, _ = eng.prove(frozenset(s.ante), C, {}, 0)
        except _OutOfBudget:
            step = None
        spent = eng.expanded
        if step is not None:
            return Provable(_contract_to(_rebuild_single(step), s, single=True), spent)
    eng = _Single(rs, budget)
    try:
        step, _ = eng.prove(frozenset(s.ante), C, {}, 0)
    except _OutOfBudget:
        return BudgetExhausted(eng.expanded + spent)
    if step is not None:
        proof = _contract_to(_rebuild_single(step), s, single=True)
        return Provable(proof, eng.expanded + spent)
    return _refute_single(s, rs, eng)


def _refute_single(s: Sequent, rs: RuleSet, eng: _Single) -> ProofResult:
    if rs.regime == SINGLE_CLASSICAL:
        v = find_classical_refutation(s)
        if v is not None:
            return RefutedClassical(dict(sorted(v.items())), eng.expanded)
    else:
        used = set().union(*(connectives(f) for f in (*s.ante, *s.succ)))
        if used <= KRIPKE_CONNECTIVES:
            for reading in admissible_readings(rs.sequent_rules):
                model = find_kripke_countermodel(s, reading)
                if model is None:
                    continue
                w = kripke_refutes(model, s)
                if w is None:
                    raise CertificateError("constructed Kripke model does not refute the sequent")
                model.validate()
                return RefutedIntuitionistic(model, w, eng.expanded)
    try:
        root = (frozenset(s.ante), s.succ[0] if s.succ else None)
        space = _reachable(eng, root)
        proved = fixpoint_provable(space, eng.options, eng.axiom)
        checked = root not in proved
        if not checked:
            raise CertificateError("fixpoint evaluation proves a goal the search could not")
    except _OutOfBudget:
        space, checked = set(), False
    return Unprovable("no cut-free proof with atomic axioms and no countermodel in the available semantics",
                      len(space), checked, eng.expanded)


@dataclass
class CertificateLog:
    """Counts of prover results, each re-verified on the way out."""

    calls: int = 0
    proofs: int = 0
    valuations: int = 0
    kripke: int = 0
    unverifiable: int = 0  # exhausted searches and budget stops carry no certificate
    rejected: int = 0

    @property
    def verified(self) -> int:
        return self.proofs + self.valuations + self.kripke


AUDIT = CertificateLog()


def verify_result(res: ProofResult, s: Sequent, rs: RuleSet, log: CertificateLog = AUDIT) -> ProofResult:
    """Re-check a prover result independently of the search that produced it."""
    log.calls += 1
    try:
        _verify(res, s, rs, log)
    except CertificateError:
        log.rejected += 1
        raise
    return res


def _verify(res: ProofResult, s: Sequent, rs: RuleSet, log: CertificateLog) -> None:
    if isinstance(res, Provable):
        if res.proof.conclusion != s:
            raise CertificateError("proof concludes a different sequent")
        _certify_proof(res.proof, rs)
        log.proofs += 1
    elif isinstance(res, RefutedClassical):
        v = res.valuation
        if not (all(eval2(f, v) for f in s.ante) and not any(eval2(f, v) for f in s.succ)):
            raise CertificateError("valuation does not refute the sequent")
        log.valuations += 1
    elif isinstance(res, RefutedIntuitionistic):
        try:
            res.model.validate()
        except SemanticsError as e:
            raise CertificateError(f"countermodel is not a Kripke model: {e}") from None
        if kripke_refutes(res.model, s) is None:
            raise CertificateError("Kripke model does not refute the sequent")
        log.kripke += 1
    else:
        log.unverifiable += 1


def prove_classical(s: Sequent, rs: RuleSet, budget: SearchBudget | None = None) -> ProofResult:
    return verify_result(_prove_classical(s, rs, budget), s, rs)


def prove_intuitionistic(s: Sequent, rs: RuleSet, budget: SearchBudget | None = None) -> ProofResult:
    return verify_result(_prove_intuitionistic(s, rs, budget), s, rs)


def decide(s: Sequent, rs: RuleSet, budget: SearchBudget | None = None) -> ProofResult:
    if rs.regime == MULTI:
        return prove_classical(s, rs, budget)
    return prove_intuitionistic(s, rs, budget)
