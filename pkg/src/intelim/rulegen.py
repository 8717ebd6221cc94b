"""Sequent and natural-deduction rules synthesized from truth tables.

A connective's truth condition and falsity condition are each written as a
minimal CNF over its arguments.  Every clause becomes a premise: positive
literals put the argument in the succedent, negative literals in the
antecedent.  Turning the premises sideways gives intelim rules.

Context conventions for :class:`RuleSchema`: every premise and the conclusion
share the antecedent context Gamma (except axioms and cut).  The succedent
context Delta appears exactly in the parts whose ``context`` flag is set.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .formula import (
    AND, HP, IMP, NAND, NOR, NOT, OR, STANDARD, XOR,
    Comp, Connective, Meta, Signature, connectives, metavariables,
    parse_schema, render_formula,
)

MAX_ARITY = 6
METAS = "ABCDEF"

MULTI = "multi"
SINGLE = "single"
SINGLE_CLASSICAL = "single-classical"
REGIMES = (MULTI, SINGLE, SINGLE_CLASSICAL)


# --------------------------------------------------------------------------
# truth tables and CNF


@dataclass(frozen=True)
class TruthTable:
    """Row ``i`` holds the output for the argument tuple spelled by ``i`` in
    binary, first argument most significant, 0 = false."""

    connective: str
    arity: int
    rows: tuple[bool, ...]
    symbol: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(bool(r) for r in self.rows))
        if self.arity < 1:
            raise ValueError("arity must be positive")
        if len(self.rows) != 2 ** self.arity:
            raise ValueError(f"{self.connective}: expected {2 ** self.arity} rows, got {len(self.rows)}")

    def __call__(self, *args: bool) -> bool:
        return self.rows[row_index(args)]

    def complement(self) -> "TruthTable":
        return TruthTable(self.connective, self.arity, tuple(not r for r in self.rows), self.symbol)

    def to_json(self) -> dict:
        return {"name": self.connective, "symbol": self.symbol, "arity": self.arity,
                "table": [int(r) for r in self.rows]}

    @classmethod
    def from_json(cls, data: dict) -> "TruthTable":
        return cls(data["name"], int(data["arity"]), tuple(data["table"]), data.get("symbol"))


def row_index(args: Sequence[bool]) -> int:
    idx = 0
    for a in args:
        idx = (idx << 1) | int(bool(a))
    return idx


def row_args(idx: int, arity: int) -> tuple[bool, ...]:
    return tuple(bool((idx >> (arity - 1 - i)) & 1) for i in range(arity))


def table_from_function(name: str, arity: int, fn, symbol: str | None = None) -> TruthTable:
    return TruthTable(name, arity, tuple(fn(*row_args(i, arity)) for i in range(2 ** arity)), symbol)


BUILTIN_TABLES = {
    "nand": table_from_function("nand", 2, lambda a, b: not (a and b), "|"),
    "hp": table_from_function("hp", 2, lambda a, b: not (a and b), "||"),
    "nor": table_from_function("nor", 2, lambda a, b: not (a or b), "!"),
    "xor": table_from_function("xor", 2, lambda a, b: a != b, "^"),
    "not": table_from_function("not", 1, lambda a: not a, "~"),
    "and": table_from_function("and", 2, lambda a, b: a and b, "&"),
    "or": table_from_function("or", 2, lambda a, b: a or b, "+"),
    "imp": table_from_function("imp", 2, lambda a, b: (not a) or b, "->"),
}

CNF = tuple  # tuple of clauses; a clause is a tuple of signed 1-based indices


def clause_key(clause: Sequence[int]):
    """Order used to pick and list clauses: shorter first, then by the indices
    of the negative literals, then by the positive ones."""
    neg = tuple(sorted(-i for i in clause if i < 0))
    pos = tuple(sorted(i for i in clause if i > 0))
    return (len(clause), neg, pos)


def _sort_clause(clause) -> tuple[int, ...]:
    return tuple(sorted(clause, key=abs))


def _prime_cubes(minterms: Iterable[int], arity: int) -> list[tuple]:
    """Quine-McCluskey prime implicants; a cube is a tuple over {0, 1, None}."""
    level = {row_args(m, arity) for m in minterms}
    level = {tuple(int(b) for b in c) for c in level}
    primes: set[tuple] = set()
    while level:
        merged: set[tuple] = set()
        used: set[tuple] = set()
        items = sorted(level, key=lambda c: tuple(-1 if x is None else x for x in c))
        for a, b in itertools.combinations(items, 2):
            diff = [i for i in range(arity) if a[i] != b[i]]
            if len(diff) == 1 and a[diff[0]] is not None and b[diff[0]] is not None:
                c = list(a)
                c[diff[0]] = None
                merged.add(tuple(c))
                used.add(a)
                used.add(b)
        primes |= level - used
        level = merged
    return sorted(primes, key=lambda c: tuple(-1 if x is None else x for x in c))


def _covers(cube, idx: int, arity: int) -> bool:
    args = row_args(idx, arity)
    return all(c is None or c == int(a) for c, a in zip(cube, args))


def _min_cover(universe: list[int], candidates: list[tuple[int, ...]], covers: dict, node_limit=200_000):
    """Minimum-cardinality cover; ties broken by literal count then clause keys."""
    universe = list(universe)
    if not universe:
        return []
    cands = sorted(candidates, key=clause_key)

    def cost(sel):
        return (len(sel), sum(len(c) for c in sel), tuple(sorted(clause_key(c) for c in sel)))

    best: list | None = None
    nodes = 0

    def search(uncovered: frozenset, chosen: list):
        nonlocal best, nodes
        nodes += 1
        if nodes > node_limit:
            return
        if not uncovered:
            if best is None or cost(chosen) < cost(best):
                best = list(chosen)
            return
        if best is not None and len(chosen) + 1 > len(best):
            return
        # branch on the element with the fewest covering candidates
        elem = min(uncovered, key=lambda e: (sum(1 for c in cands if e in covers[c]), e))
        for c in cands:
            if elem in covers[c]:
                chosen.append(c)
                search(uncovered - covers[c], chosen)
                chosen.pop()

    search(frozenset(universe), [])
    if best is None:
        # greedy fallback, then drop redundant clauses
        best, left = [], set(universe)
        while left:
            c = max(cands, key=lambda c: (len(covers[c] & left), [-k for k in clause_key(c)[0:1]]))
            best.append(c)
            left -= covers[c]
        for c in list(reversed(best)):
            rest = [d for d in best if d is not c]
            if set().union(*(covers[d] for d in rest)) >= set(universe):
                best = rest
    return best


def truth_condition_cnf(t: TruthTable, polarity: bool = True) -> CNF:
    """Minimal CNF of the table (``polarity=True``) or of its complement."""
    if t.arity > MAX_ARITY:
        raise ValueError(f"arity {t.arity} exceeds the generation cap of {MAX_ARITY}")
    f = t if polarity else t.complement()
    zeros = [i for i, r in enumerate(f.rows) if not r]
    cubes = _prime_cubes(zeros, t.arity)
    clauses = []
    for cube in cubes:
        clause = tuple(-(i + 1) if b == 1 else (i + 1) for i, b in enumerate(cube) if b is not None)
        clauses.append(_sort_clause(clause))
    covers = {}
    for cube, clause in zip(cubes, clauses):
        covers[clause] = frozenset(z for z in zeros if _covers(cube, z, t.arity))
    chosen = _min_cover(zeros, clauses, covers)
    return tuple(sorted((_sort_clause(c) for c in chosen), key=clause_key))


def cnf_satisfied(cnf: CNF, args: Sequence[bool]) -> bool:
    return all(any(args[abs(i) - 1] == (i > 0) for i in clause) for clause in cnf)


# --------------------------------------------------------------------------
# rule schemas


@dataclass(frozen=True)
class PremiseSchema:
    """Auxiliary formulas of one sequent (premise or conclusion)."""

    left: tuple = ()
    right: tuple = ()
    context: bool = True

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))


@dataclass(frozen=True)
class RuleSchema:
    name: str
    side: str  # "left", "right", "structural" or "classical"
    principal: object | None
    premises: tuple[PremiseSchema, ...]
    conclusion: PremiseSchema
    tags: frozenset = frozenset()
    connective: str | None = None
    left_context: bool = True
    invertible: bool = False
    nd_name: str | None = None
    origin: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))
        object.__setattr__(self, "tags", frozenset(self.tags))

    @property
    def is_cut(self) -> bool:
        return "cut" in self.tags

    def metavariables(self) -> set[str]:
        out: set[str] = set()
        for part in (self.conclusion, *self.premises):
            for f in (*part.left, *part.right):
                out |= metavariables(f)
        return out


@dataclass(frozen=True)
class NDPremise:
    formulas: tuple = ()
    discharge: tuple = ()
    context: bool = False

    def __post_init__(self):
        object.__setattr__(self, "formulas", tuple(self.formulas))
        object.__setattr__(self, "discharge", tuple(self.discharge))


INTRO, ELIM, FALSUM_INTRO, CLASSICAL_ELIM, ND_STRUCTURAL = (
    "intro", "elim", "falsum-intro", "classical-elim", "structural")


@dataclass(frozen=True)
class NDRuleSchema:
    """An empty ``formulas`` tuple in the single-conclusion regime is falsum."""

    name: str
    kind: str
    premises: tuple[NDPremise, ...]
    conclusion: NDPremise
    connective: str | None = None
    principal: object | None = None

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))


@dataclass(frozen=True)
class RuleSet:
    name: str
    signature: Signature
    sequent_rules: tuple[RuleSchema, ...]
    nd_rules: tuple[NDRuleSchema, ...] = ()
    regime: str = MULTI

    def __post_init__(self):
        object.__setattr__(self, "sequent_rules", tuple(self.sequent_rules))
        object.__setattr__(self, "nd_rules", tuple(self.nd_rules))
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        names = [r.name for r in self.sequent_rules]
        if len(names) != len(set(names)):
            raise ValueError(f"{self.name}: duplicate sequent rule names")
        nd_names = [r.name for r in self.nd_rules]
        if len(nd_names) != len(set(nd_names)):
            raise ValueError(f"{self.name}: duplicate ND rule names")
        known = self.signature.names()
        for r in self.sequent_rules:
            for part in (r.conclusion, *r.premises):
                for f in (*part.left, *part.right):
                    missing = connectives(f) - known
                    if missing:
                        raise ValueError(f"rule {r.name} uses connectives {sorted(missing)} outside the signature")

    @property
    def single(self) -> bool:
        return self.regime != MULTI

    def rule(self, name: str) -> RuleSchema:
        for r in self.sequent_rules:
            if r.name == name:
                return r
        raise KeyError(f"rule {name!r} not in {self.name}")

    def nd_rule(self, name: str) -> NDRuleSchema:
        for r in self.nd_rules:
            if r.name == name:
                return r
        raise KeyError(f"ND rule {name!r} not in {self.name}")

    def has_rule(self, name: str) -> bool:
        return any(r.name == name for r in self.sequent_rules)


# --------------------------------------------------------------------------
# generation


def _metas(arity: int) -> list[Meta]:
    return [Meta(METAS[i]) for i in range(arity)]


def _premise_from_clause(clause, metas, context=True) -> PremiseSchema:
    left = tuple(metas[-i - 1] for i in clause if i < 0)
    right = tuple(metas[i - 1] for i in clause if i > 0)
    return PremiseSchema(left, right, context)


def _symbol(t: TruthTable) -> str:
    if t.symbol:
        return t.symbol
    try:
        return STANDARD.by_name(t.connective).symbol
    except KeyError:
        return t.connective


def generate_sequent_rules(t: TruthTable) -> tuple[RuleSchema, RuleSchema]:
    """Right and left rules (multiple-succedent, with contexts Gamma, Delta)."""
    if t.arity > MAX_ARITY:
        raise ValueError(f"arity {t.arity} exceeds the generation cap of {MAX_ARITY}")
    metas = _metas(t.arity)
    principal = Comp(t.connective, tuple(metas))
    sym = _symbol(t)
    right = RuleSchema(
        name=f"{sym}R", side="right", principal=principal,
        premises=tuple(_premise_from_clause(c, metas) for c in truth_condition_cnf(t, True)),
        conclusion=PremiseSchema((), (principal,), True),
        tags={"multi"}, connective=t.connective, invertible=True)
    left = RuleSchema(
        name=f"{sym}L", side="left", principal=principal,
        premises=tuple(_premise_from_clause(c, metas) for c in truth_condition_cnf(t, False)),
        conclusion=PremiseSchema((principal,), (), True),
        tags={"multi"}, connective=t.connective, invertible=True)
    return right, left


def split_multi_right_premises(r: RuleSchema) -> list[RuleSchema]:
    """Replace premises with several right auxiliaries by one-auxiliary variants."""
    if all(len(p.right) <= 1 for p in r.premises):
        return [r]
    options = [[replace(p, right=(f,)) for f in p.right] if len(p.right) > 1 else [p] for p in r.premises]
    out = []
    for k, combo in enumerate(itertools.product(*options), start=1):
        out.append(replace(r, name=f"{r.name}_{k}", premises=tuple(combo),
                           invertible=False, origin=r.origin or r.name))
    return out


def _primed(name: str) -> str:
    if "_" in name:
        head, _, tail = name.partition("_")
        return f"{head}'_{tail}"
    return name + "'"


MULTI_STRUCTURAL_NAMES = ("ax", "WL", "WR", "CL", "CR", "cut")
SINGLE_STRUCTURAL_NAMES = ("ax", "WL", "WR'", "CL", "cut")


def structural_rules(regime: str = MULTI) -> tuple[RuleSchema, ...]:
    A = Meta("A")
    ax = RuleSchema("ax", "structural", None, (), PremiseSchema((A,), (A,), False),
                    tags={"axiom"}, left_context=False)
    wl = RuleSchema("WL", "structural", None, (PremiseSchema(),), PremiseSchema((A,), ()), tags={"weakening"})
    cl = RuleSchema("CL", "structural", None, (PremiseSchema((A, A), ()),), PremiseSchema((A,), ()),
                    tags={"contraction"})
    cut = RuleSchema("cut", "structural", None,
                     (PremiseSchema((), (A,)), PremiseSchema((A,), ())), PremiseSchema(),
                     tags={"cut"}, left_context=False)
    if regime == MULTI:
        wr = RuleSchema("WR", "structural", None, (PremiseSchema(),), PremiseSchema((), (A,)),
                        tags={"weakening"})
        cr = RuleSchema("CR", "structural", None, (PremiseSchema((), (A, A)),), PremiseSchema((), (A,)),
                        tags={"contraction"})
        return (ax, wl, wr, cl, cr, cut)
    wr1 = RuleSchema("WR'", "structural", None, (PremiseSchema((), (), False),),
                     PremiseSchema((), (A,), False), tags={"weakening"}, nd_name="botI")
    return (ax, wl, wr1, cl, cut)


def restrict_single_succedent(rs: RuleSet) -> RuleSet:
    """Single-succedent restriction of a multiple-succedent rule set.

    Right rules lose the succedent context.  A left-rule premise keeps it only
    when it has no right auxiliary formula, so the rules for | and its
    relatives come out with an empty conclusion succedent.
    """
    if rs.regime != MULTI:
        raise ValueError(f"{rs.name} is not a multiple-succedent rule set")
    out: list[RuleSchema] = list(structural_rules(SINGLE))
    for r in rs.sequent_rules:
        if r.side == "structural":
            continue
        if any(len(p.right) > 1 for p in r.premises):
            raise ValueError(f"rule {r.name} has a premise with several right auxiliaries; split it first")
        if r.side == "right":
            prems = tuple(replace(p, context=False) for p in r.premises)
            concl = replace(r.conclusion, context=False)
        elif r.side == "left":
            prems = tuple(replace(p, context=not p.right) for p in r.premises)
            concl = replace(r.conclusion, context=any(p.context for p in prems))
        else:
            raise ValueError(f"cannot restrict rule {r.name} of side {r.side!r}")
        out.append(replace(r, name=_primed(r.name), premises=prems, conclusion=concl,
                           tags=(r.tags - {"multi"}) | {"single"}, invertible=False,
                           origin=r.origin or r.name))
    return RuleSet(rs.name + "'", rs.signature, tuple(out), (), SINGLE)


def _nd_base_name(r: RuleSchema, letter: str) -> str:
    # names are <symbol><side letter>[primes][_k]
    base = r.name.split("_", 1)
    head = base[0].rstrip("'")
    suffix = "_" + base[1] if len(base) > 1 else ""
    head = head[:-1] + letter if head and head[-1] in "RL" else head + letter
    return head + suffix


def nd_name_for(r: RuleSchema, multi: bool) -> str | None:
    """Name of the ND rule obtained from sequent rule ``r`` (``None`` if none)."""
    if r.nd_name:
        return r.nd_name
    if r.side == "right":
        return _nd_base_name(r, "I") + ("_m" if multi else "")
    if r.side == "left":
        return _nd_base_name(r, "E") + ("_m" if multi else "")
    if r.side == "classical":
        return r.name.replace("L_C", "E_C")
    if multi and r.name in ("WR", "CR"):
        return {"WR": "W_m", "CR": "C_m"}[r.name]
    return None


def derive_nd_rules(rs: RuleSet) -> RuleSet:
    """Turn sequent premises sideways: antecedent auxiliaries become
    dischargeable assumptions, an empty succedent becomes falsum."""
    nd: list[NDRuleSchema] = []
    multi = rs.regime == MULTI
    A = Meta("A")
    for r in rs.sequent_rules:
        name = nd_name_for(r, multi)
        if name is None:
            continue
        if r.side == "right":
            nd.append(NDRuleSchema(
                name, INTRO,
                tuple(NDPremise(p.right, p.left, multi) for p in r.premises),
                NDPremise((r.principal,), (), multi), r.connective, r.principal))
        elif r.side == "left":
            major = NDPremise((r.principal,), (), multi)
            minors = tuple(NDPremise(p.right, p.left, multi or p.context) for p in r.premises)
            nd.append(NDRuleSchema(
                name, ELIM, (major, *minors),
                NDPremise((), (), multi or r.conclusion.context), r.connective, r.principal))
        elif r.side == "classical":
            prem = r.premises[0]
            nd.append(NDRuleSchema(
                name, CLASSICAL_ELIM, (NDPremise((), prem.left, False),),
                NDPremise(r.conclusion.right, (), False), r.connective, None))
        elif r.name == "WR'":
            nd.append(NDRuleSchema(name, FALSUM_INTRO, (NDPremise((), (), False),), NDPremise((A,), (), False)))
        elif r.name == "WR":
            nd.append(NDRuleSchema(name, ND_STRUCTURAL, (NDPremise((), (), True),), NDPremise((A,), (), True)))
        elif r.name == "CR":
            nd.append(NDRuleSchema(name, ND_STRUCTURAL, (NDPremise((A, A), (), True),), NDPremise((A,), (), True)))
    return replace(rs, nd_rules=tuple(nd))


def nd_correspondence(rs: RuleSet) -> dict[str, RuleSchema]:
    """ND rule name -> the sequent rule it was derived from."""
    multi = rs.regime == MULTI
    out = {}
    for r in rs.sequent_rules:
        name = nd_name_for(r, multi)
        if name is not None and any(n.name == name for n in rs.nd_rules):
            out[name] = r
    return out


# --------------------------------------------------------------------------
# hand-specified rules


def classical_rule(conn: str, sig: Signature) -> RuleSchema:
    """``Gamma |- A`` from ``~A, Gamma |- A`` with ``~A`` spelled by ``conn``."""
    A = Meta("A")
    c = sig.by_name(conn)
    negA = Comp(conn, (A,)) if c.arity == 1 else Comp(conn, (A, A))
    return RuleSchema(f"{c.symbol}L_C", "classical", None,
                      (PremiseSchema((negA,), (A,), False),), PremiseSchema((), (A,), False),
                      tags={"classical-extension", "single"}, connective=conn,
                      nd_name=f"{c.symbol}E_C")


def negation_connectives(sig: Signature) -> list[str]:
    """Connectives ``c`` with ``c(A, ..., A)`` equivalent to ``~A``."""
    out = []
    for c in sig.connectives:
        t = BUILTIN_TABLES.get(c.name)
        if t is None:
            continue
        diag = (t(*([False] * c.arity)), t(*([True] * c.arity)))
        if diag == (True, False) and c.name != "hp":
            out.append(c.name)
    return out


def hp_rules(fixed: bool = False) -> tuple[RuleSchema, ...]:
    A, B = Meta("A"), Meta("B")
    P = Comp("hp", (A, B))
    r1 = RuleSchema("||R'_1", "right", P, (PremiseSchema((A,), (), False),), PremiseSchema((), (P,), False),
                    tags={"single"}, connective="hp", nd_name="||I_1")
    r2 = RuleSchema("||R'_2", "right", P, (PremiseSchema((B,), (), False),), PremiseSchema((), (P,), False),
                    tags={"single"}, connective="hp", nd_name="||I_2")
    if not fixed:
        l1 = RuleSchema("||L'", "left", P, (PremiseSchema((), (A,), False), PremiseSchema((), (B,), False)),
                        PremiseSchema((P,), (), False), tags={"single"}, connective="hp", nd_name="||E")
        return (r1, r2, l1)
    AA, BB = Comp("hp", (A, A)), Comp("hp", (B, B))
    l2 = RuleSchema("||L''", "left", P, (PremiseSchema((AA,), (), True), PremiseSchema((BB,), (), True)),
                    PremiseSchema((P,), (), True), tags={"single"}, connective="hp", nd_name="||E'")
    negr = RuleSchema("||~R", "left", AA, (PremiseSchema((), (A,), False),), PremiseSchema((AA,), (), False),
                      tags={"single"}, connective="hp", nd_name="||~E")
    return (r1, r2, l2, negr)


# --------------------------------------------------------------------------
# built-in calculi


def multi_ruleset(name: str, conns: Iterable[Connective]) -> RuleSet:
    conns = list(conns)
    rules = list(structural_rules(MULTI))
    for c in conns:
        rules.extend(generate_sequent_rules(BUILTIN_TABLES[c.name]))
    return RuleSet(name, Signature(tuple(conns)), tuple(rules), (), MULTI)


def single_ruleset(name: str, conns: Iterable[Connective]) -> RuleSet:
    multi = multi_ruleset(name, conns)
    split = [s for r in multi.sequent_rules for s in split_multi_right_premises(r)]
    return replace(restrict_single_succedent(replace(multi, sequent_rules=tuple(split))), name=name)


def add_classical(rs: RuleSet, name: str | None = None) -> RuleSet:
    extra = tuple(classical_rule(c, rs.signature) for c in negation_connectives(rs.signature))
    if not extra:
        raise ValueError(f"{rs.name}: no connective expresses negation")
    return RuleSet(name or rs.name + "+C", rs.signature, rs.sequent_rules + extra, (), SINGLE_CLASSICAL)


def _hp_set(name: str, fixed: bool) -> RuleSet:
    return RuleSet(name, Signature((HP,)), structural_rules(SINGLE) + hp_rules(fixed), (), SINGLE)


def _build(name: str) -> RuleSet:
    if name == "LS":
        return multi_ruleset("LS", [NAND])
    if name == "LS-single":
        return single_ruleset("LS-single", [NAND])
    if name == "LS-single-classical":
        return add_classical(single_ruleset("LS-single", [NAND]), "LS-single-classical")
    if name == "NSm":
        return replace(derive_nd_rules(_build("LS")), name="NSm")
    if name == "NS":
        return replace(derive_nd_rules(_build("LS-single")), name="NS")
    if name == "NSC":
        return replace(derive_nd_rules(_build("LS-single-classical")), name="NSC")
    if name == "HP":
        return derive_nd_rules(_hp_set("HP", False))
    if name == "HP-fixed":
        return derive_nd_rules(_hp_set("HP-fixed", True))
    if name == "LJ-core":
        return derive_nd_rules(single_ruleset("LJ-core", [NOT, AND, OR, IMP]))
    if name == "LK-core":
        return multi_ruleset("LK-core", [NOT, AND, OR, IMP])
    if name == "LS-nor":
        return multi_ruleset("LS-nor", [NOR])
    if name == "LS-nor-single":
        return derive_nd_rules(single_ruleset("LS-nor-single", [NOR]))
    if name == "LS-xor":
        return multi_ruleset("LS-xor", [XOR])
    if name == "LS-xor-single":
        return derive_nd_rules(single_ruleset("LS-xor-single", [XOR]))
    raise KeyError(f"unknown rule set {name!r}")


BUILTIN_NAMES = ("LS", "LS-single", "LS-single-classical", "NSm", "NS", "NSC", "HP", "HP-fixed",
                 "LJ-core", "LK-core", "LS-nor", "LS-nor-single", "LS-xor", "LS-xor-single")

_cache: dict[str, RuleSet] = {}


def builtin_ruleset(name: str) -> RuleSet:
    """A named calculus; ``A+B`` names the union of two calculi."""
    if name in _cache:
        return _cache[name]
    if "+" in name:
        parts = [builtin_ruleset(p.strip()) for p in name.split("+")]
        rs = parts[0]
        for p in parts[1:]:
            rs = combine(rs, p)
        rs = replace(rs, name=name)
    else:
        rs = _build(name)
    _cache[name] = rs
    return rs


def combine(a: RuleSet, b: RuleSet) -> RuleSet:
    if (a.regime == MULTI) != (b.regime == MULTI):
        raise ValueError(f"cannot combine {a.name} ({a.regime}) with {b.name} ({b.regime})")
    regime = SINGLE_CLASSICAL if SINGLE_CLASSICAL in (a.regime, b.regime) else a.regime

    def merge(xs, ys, what):
        out = list(xs)
        for y in ys:
            same = [x for x in out if x.name == y.name]
            if same:
                if same[0] != y:
                    raise ValueError(f"conflicting {what} {y.name!r} in {a.name} and {b.name}")
                continue
            out.append(y)
        return tuple(out)

    return RuleSet(f"{a.name}+{b.name}", a.signature.union(b.signature),
                   merge(a.sequent_rules, b.sequent_rules, "rule"),
                   merge(a.nd_rules, b.nd_rules, "ND rule"), regime)


def ruleset_for_connective(t: TruthTable, single: bool = False, nd: bool = False) -> RuleSet:
    sym = _symbol(t)
    conn = Connective(t.connective, sym, t.arity)
    right, left = generate_sequent_rules(t)
    rs = RuleSet(f"L({t.connective})", Signature((conn,)), structural_rules(MULTI) + (right, left), (), MULTI)
    if single:
        split = [s for r in rs.sequent_rules for s in split_multi_right_premises(r)]
        rs = restrict_single_succedent(replace(rs, sequent_rules=tuple(split)))
    if nd:
        rs = derive_nd_rules(rs)
    return rs


# --------------------------------------------------------------------------
# display and serialization


def _fmt(fs, sig) -> list[str]:
    return [render_formula(f, sig) for f in fs]


def sequent_display(part: PremiseSchema, sig: Signature = STANDARD, left_context=True,
                    gamma="G", delta="D") -> tuple[list[str], list[str]]:
    """Antecedent and succedent with the context slots written as names."""
    ante = _fmt(part.left, sig) + ([gamma] if left_context else [])
    succ = ([delta] if part.context else []) + _fmt(part.right, sig)
    return ante, succ


def rule_display(r: RuleSchema, sig: Signature = STANDARD) -> dict:
    if r.is_cut:
        return {"name": r.name, "premises": [[["G1"], ["D1", "?A"]], [["?A", "G2"], ["D2"]]],
                "conclusion": [["G1", "G2"], ["D1", "D2"]]}
    prem = [list(map(sorted, sequent_display(p, sig, r.left_context))) for p in r.premises]
    concl = list(map(sorted, sequent_display(r.conclusion, sig, r.left_context)))
    return {"name": r.name, "premises": prem, "conclusion": concl}


def nd_rule_display(r: NDRuleSchema, sig: Signature = STANDARD) -> dict:
    def show(p: NDPremise):
        concl = sorted(_fmt(p.formulas, sig) + (["D"] if p.context else []))
        return {"conclusion": concl or ["_|_"], "discharge": sorted(_fmt(p.discharge, sig))}

    return {"name": r.name, "kind": r.kind, "premises": [show(p) for p in r.premises],
            "conclusion": show(r.conclusion)["conclusion"]}


def _part_json(p: PremiseSchema, sig):
    return {"ante": _fmt(p.left, sig), "succ": _fmt(p.right, sig), "context": p.context}


def _part_from(d, sig) -> PremiseSchema:
    return PremiseSchema(tuple(parse_schema(x, sig) for x in d["ante"]),
                         tuple(parse_schema(x, sig) for x in d["succ"]), bool(d.get("context", True)))


def _nd_part_json(p: NDPremise, sig):
    return {"formulas": _fmt(p.formulas, sig), "discharge": _fmt(p.discharge, sig), "context": p.context}


def _nd_part_from(d, sig) -> NDPremise:
    return NDPremise(tuple(parse_schema(x, sig) for x in d["formulas"]),
                     tuple(parse_schema(x, sig) for x in d.get("discharge", [])), bool(d.get("context", False)))


def ruleset_to_json(rs: RuleSet) -> dict:
    sig = rs.signature
    return {
        "name": rs.name,
        "regime": rs.regime,
        "signature": sig.to_json(),
        "sequent_rules": [
            {"name": r.name, "side": r.side,
             "principal": None if r.principal is None else render_formula(r.principal, sig),
             "conclusion": _part_json(r.conclusion, sig),
             "premises": [_part_json(p, sig) for p in r.premises],
             "tags": sorted(r.tags), "connective": r.connective, "left_context": r.left_context,
             "invertible": r.invertible, "nd_name": r.nd_name, "origin": r.origin}
            for r in rs.sequent_rules],
        "nd_rules": [
            {"name": r.name, "kind": r.kind, "connective": r.connective,
             "principal": None if r.principal is None else render_formula(r.principal, sig),
             "conclusion": _nd_part_json(r.conclusion, sig),
             "premises": [_nd_part_json(p, sig) for p in r.premises]}
            for r in rs.nd_rules],
    }


def ruleset_from_json(data: dict) -> RuleSet:
    sig = Signature.from_json(data["signature"])
    seq = []
    for d in data.get("sequent_rules", []):
        seq.append(RuleSchema(
            d["name"], d["side"],
            None if d.get("principal") is None else parse_schema(d["principal"], sig),
            tuple(_part_from(p, sig) for p in d["premises"]), _part_from(d["conclusion"], sig),
            frozenset(d.get("tags", ())), d.get("connective"), d.get("left_context", True),
            d.get("invertible", False), d.get("nd_name"), d.get("origin")))
    nd = []
    for d in data.get("nd_rules", []):
        nd.append(NDRuleSchema(
            d["name"], d["kind"], tuple(_nd_part_from(p, sig) for p in d["premises"]),
            _nd_part_from(d["conclusion"], sig), d.get("connective"),
            None if d.get("principal") is None else parse_schema(d["principal"], sig)))
    return RuleSet(data["name"], sig, tuple(seq), tuple(nd), data.get("regime", MULTI))


def load_ruleset(source: str) -> RuleSet:
    """A built-in name (``A+B`` allowed) or a path to a rule-set JSON file."""
    if source.endswith(".json"):
        with open(source) as fh:
            return ruleset_from_json(json.load(fh))
    return builtin_ruleset(source)
