"""Removal of maximal formulas and restriction of classical reductio to atoms.

A maximal formula is the conclusion of an introduction that is at once the
major premise of an elimination.  Contractions are not hard-coded per
connective: the premises of the intro and the minors of the elim are read as
Horn clauses over the connective's arguments (discharged assumptions imply the
premise's conclusion) and chained forward until the elim's conclusion is
reached, grafting each derived argument into the assumptions that need it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .formula import Comp, Falsum, size
from .nd import Assume, Infer, _Fresh, _postorder, at, graft_labels, labels, open_assumptions, replace_at
from .rulegen import (
    CLASSICAL_ELIM, ELIM, FALSUM_INTRO, INTRO, RuleSet, builtin_ruleset, derive_nd_rules,
)

DEFAULT_CAP = 100_000


class NormalizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class MaximalOccurrence:
    path: tuple[int, ...]  # address of the intro node
    degree: int
    formula: object


@lru_cache(maxsize=None)
def default_rules() -> RuleSet:
    """ND rules for the stroke (with its classical rule), the arrow and xor."""
    parts = [builtin_ruleset("NSC")]
    for name in ("LS-nor-single", "LS-xor-single"):
        parts.append(derive_nd_rules(builtin_ruleset(name)))
    nd, seen = [], set()
    for rs in parts:
        for r in rs.nd_rules:
            if r.name not in seen:
                seen.add(r.name)
                nd.append(r)
    sig = parts[0].signature
    for rs in parts[1:]:
        sig = sig.union(rs.signature)
    return RuleSet("ND-default", sig, parts[0].sequent_rules, tuple(nd), parts[0].regime)


def _kinds(rs: RuleSet | None) -> dict[str, str]:
    rs = rs or default_rules()
    return {r.name: r.kind for r in rs.nd_rules}


def _postorder_paths(d) -> list[tuple[tuple[int, ...], object]]:
    out = []
    stack = [((), d, False)]
    while stack:
        path, n, done = stack.pop()
        if done or isinstance(n, Assume):
            out.append((path, n))
            continue
        stack.append((path, n, True))
        for i in range(len(n.children) - 1, -1, -1):
            stack.append((path + (i,), n.children[i], False))
    return out


def maximal_occurrences(d, rs: RuleSet | None = None) -> list[MaximalOccurrence]:
    """Every intro conclusion that is the major premise of an elim,
    leftmost-innermost first."""
    kinds = _kinds(rs)
    out = []
    for path, n in _postorder_paths(d):
        if isinstance(n, Infer) and kinds.get(n.rule) == ELIM and n.children:
            major = n.children[0]
            if isinstance(major, Infer) and kinds.get(major.rule) == INTRO:
                out.append(MaximalOccurrence(path + (0,), size(major.conclusion), major.conclusion))
    return _order(out, d)


def _order(occs: list[MaximalOccurrence], d) -> list[MaximalOccurrence]:
    rank = {path: i for i, (path, _) in enumerate(_postorder_paths(d))}
    return sorted(occs, key=lambda o: rank[o.path])


def _check_occurrence(d, o: MaximalOccurrence, kinds):
    if not o.path or o.path[-1] != 0:
        raise NormalizationError("stale occurrence: not a major premise position")
    try:
        intro = at(d, o.path)
        elim = at(d, o.path[:-1])
    except (IndexError, AttributeError):
        raise NormalizationError("stale occurrence: path no longer exists") from None
    if not (isinstance(intro, Infer) and kinds.get(intro.rule) == INTRO
            and kinds.get(elim.rule) == ELIM and intro.conclusion == o.formula):
        raise NormalizationError("stale occurrence: no intro/elim pair at the path")
    return intro, elim


def _falsum_rule(rs: RuleSet | None) -> str:
    for r in (rs or default_rules()).nd_rules:
        if r.kind == FALSUM_INTRO:
            return r.name
    raise NormalizationError("rule set has no falsum introduction")


def contract(intro: Infer, elim: Infer, fresh: _Fresh, falsum_rule: str = "botI"):
    """Contractum of an elim applied directly to an intro."""
    goal = elim.conclusion
    # clauses: (premise derivation, labels discharged at that premise)
    clauses = list(zip(intro.children, intro.discharged))
    clauses += list(zip(elim.children[1:], elim.discharged[1:]))
    facts: dict = {}
    used = [False] * len(clauses)
    progress = True
    while progress:
        progress = False
        for i, (sub, closed) in enumerate(clauses):
            if used[i]:
                continue
            need = {lab: f for lab, f in open_assumptions(sub).items() if lab in closed}
            if any(f not in facts for f in need.values()):
                continue
            used[i] = True
            progress = True
            res = graft_labels(sub, {lab: facts[f] for lab, f in need.items()}, fresh) if need else sub
            c = res.conclusion
            if c == goal:
                return res
            if c is Falsum:
                return Infer(falsum_rule, goal, (res,))
            facts.setdefault(c, res)
    raise NormalizationError("premises of the redex do not chain to its conclusion")


def reduce_at(d, o: MaximalOccurrence, rs: RuleSet | None = None):
    kinds = _kinds(rs)
    intro, elim = _check_occurrence(d, o, kinds)
    fresh = _Fresh(max(labels(d) | {0}))
    new = contract(intro, elim, fresh, _falsum_rule(rs))
    return replace_at(d, o.path[:-1], new)


def _measure(occs: list[MaximalOccurrence]) -> tuple[int, int]:
    if not occs:
        return (0, 0)
    top = max(o.degree for o in occs)
    return (top, sum(1 for o in occs if o.degree == top))


def _pick(occs: list[MaximalOccurrence]) -> MaximalOccurrence:
    """A maximal-degree occurrence with no other of that degree inside its
    elim's subtree; the rightmost such one."""
    top = max(o.degree for o in occs)
    tops = [o for o in occs if o.degree == top]
    def inside(p, o):
        elim = o.path[:-1]
        return p is not o and p.path[:len(elim)] == elim

    inner = [o for o in tops if not any(inside(p, o) for p in tops)]
    return inner[-1]


def normalize(d, rs: RuleSet | None = None, cap: int = DEFAULT_CAP):
    """Reduce maximal occurrences until none remain.

    Each step must lower (highest degree, number of occurrences of that
    degree) lexicographically; a violation raises :class:`NormalizationError`.
    """
    occs = maximal_occurrences(d, rs)
    steps = 0
    while occs:
        if steps >= cap:
            raise NormalizationError(f"normalization did not finish within {cap} steps")
        before = _measure(occs)
        d = reduce_at(d, _pick(occs), rs)
        occs = maximal_occurrences(d, rs)
        after = _measure(occs)
        if not after < before:
            raise NormalizationError(f"reduction measure did not decrease: {before} -> {after}")
        steps += 1
    return d


# --------------------------------------------------------------------------
# classical reductio on compound stroke formulas


def _stroke_rules(rs: RuleSet):
    intro = elim = None
    for r in rs.nd_rules:
        if r.connective == "nand" and r.kind == INTRO:
            intro = r.name
        elif r.connective == "nand" and r.kind == ELIM:
            elim = r.name
    if intro is None or elim is None:
        raise NormalizationError(f"{rs.name} has no stroke intro/elim pair")
    return intro, elim


def atomize_classical(d, rs: RuleSet | None = None):
    """Rewrite every classical reductio whose conclusion is ``A|B`` so that
    it becomes a stroke introduction over the same falsum derivation, in which
    each discharged ``not (A|B)`` is derived from the new assumptions A and B.

    Works bottom up over distinct nodes, so shared subderivations are
    rewritten once and stay shared.
    """
    rs = rs or builtin_ruleset("NSC")
    kinds = _kinds(rs)
    intro_name, elim_name = _stroke_rules(rs)
    fresh = _Fresh(max(labels(d) | {0}))
    memo: dict[int, object] = {}
    for n in _postorder(d):
        if isinstance(n, Assume):
            memo[id(n)] = n
            continue
        kids = tuple(memo[id(c)] for c in n.children)
        if any(k is not c for k, c in zip(kids, n.children)):
            n2 = Infer(n.rule, n.conclusion, kids, n.discharged)
        else:
            n2 = n
        if kinds.get(n.rule) == CLASSICAL_ELIM and isinstance(n.conclusion, Comp):
            n2 = _atomize_one(n2, intro_name, elim_name, fresh)
        memo[id(n)] = n2
    return memo[id(d)]


def _atomize_one(node, intro_name: str, elim_name: str, fresh: _Fresh):
    f = node.conclusion
    if f.conn != "nand":
        raise NormalizationError(f"cannot atomize a reductio concluding {f!r}")
    a, b = f.args
    la, lb, l1 = fresh(), fresh(), fresh()
    bottom = Infer(elim_name, Falsum, (Assume(f, l1), Assume(a, la), Assume(b, lb)))
    neg_f = Infer(intro_name, Comp("nand", (f, f)), (bottom,), (frozenset({l1}),))
    body = graft_labels(node.children[0], {lab: neg_f for lab in node.discharged[0]}, fresh)
    return Infer(intro_name, f, (body,), (frozenset({la, lb}),))
