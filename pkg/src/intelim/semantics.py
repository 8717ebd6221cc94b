"""Finite ordered matrices and finite Kripke models.

A sequent holds in an ordered matrix under ``v`` when the least antecedent
value is at most the greatest succedent value.  The minimum over an empty
antecedent is the top value and the maximum over an empty succedent is the
bottom value, so ``Gamma =>`` holds iff some antecedent formula is bottom.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .formula import Comp, Falsum, Meta, Var, fkey, substitute
from .rulegen import MULTI, RuleSchema
from .sequent import Sequent


class SemanticsError(ValueError):
    pass


# --------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class Matrix:
    """Values are listed least first; tables map argument tuples to values."""

    name: str
    values: tuple[str, ...]
    designated: frozenset[str]
    tables: Mapping[str, Mapping[tuple, str]] = field(hash=False, compare=False)

    def __post_init__(self):
        if not self.values or len(set(self.values)) != len(self.values):
            raise SemanticsError("matrix values must be non-empty and distinct")
        if not self.designated or not set(self.designated) <= set(self.values):
            raise SemanticsError("designated values must be a non-empty subset of the values")
        for conn, table in self.tables.items():
            arities = {len(k) for k in table}
            if len(arities) != 1:
                raise SemanticsError(f"table for {conn} mixes arities")
            (n,) = arities
            for args in itertools.product(self.values, repeat=n):
                if table.get(args) not in self.values:
                    raise SemanticsError(f"table for {conn} is not total at {args}")

    @property
    def least(self) -> str:
        return self.values[0]

    @property
    def greatest(self) -> str:
        return self.values[-1]

    def rank(self, x: str) -> int:
        return self.values.index(x)

    def leq(self, a: str, b: str) -> bool:
        return self.rank(a) <= self.rank(b)

    def min(self, xs: Iterable[str]) -> str:
        xs = list(xs)
        return min(xs, key=self.rank) if xs else self.greatest

    def max(self, xs: Iterable[str]) -> str:
        xs = list(xs)
        return max(xs, key=self.rank) if xs else self.least

    def to_json(self) -> dict:
        def nest(table, n, prefix=()):
            if len(prefix) == n:
                return table[prefix]
            return [nest(table, n, prefix + (v,)) for v in self.values]

        tables = {}
        for conn, table in self.tables.items():
            n = len(next(iter(table)))
            tables[conn] = nest(table, n)
        return {"name": self.name, "values": list(self.values),
                "designated": [v for v in self.values if v in self.designated], "tables": tables}

    @classmethod
    def from_json(cls, data: dict) -> "Matrix":
        values = tuple(str(v) for v in data["values"])

        def flatten(nested, prefix=()):
            if not isinstance(nested, list):
                yield prefix, str(nested)
                return
            if len(nested) != len(values):
                raise SemanticsError("table rows must list one entry per value")
            for v, sub in zip(values, nested):
                yield from flatten(sub, prefix + (v,))

        tables = {conn: dict(flatten(t)) for conn, t in data["tables"].items()}
        return cls(data.get("name", "matrix"), values, frozenset(str(d) for d in data["designated"]), tables)


def _two_valued() -> Matrix:
    F, T = "0", "1"
    b = {False: F, True: T}
    fns = {
        "nand": lambda x, y: not (x and y), "hp": lambda x, y: not (x and y),
        "nor": lambda x, y: not (x or y), "xor": lambda x, y: x != y,
        "and": lambda x, y: x and y, "or": lambda x, y: x or y, "imp": lambda x, y: (not x) or y,
    }
    tables = {c: {(b[x], b[y]): b[fn(x, y)] for x in (False, True) for y in (False, True)} for c, fn in fns.items()}
    tables["not"] = {(F,): T, (T,): F}
    return Matrix("two-valued", (F, T), frozenset({T}), tables)


TWO_VALUED = _two_valued()


@lru_cache(maxsize=None)
def three_valued() -> Matrix:
    text = resources.files("intelim").joinpath("data/three_valued.json").read_text()
    return Matrix.from_json(json.loads(text))


def load_matrix(source: str) -> Matrix:
    if source in ("builtin:3val", "3val"):
        return three_valued()
    if source in ("builtin:2val", "2val"):
        return TWO_VALUED
    with open(source) as fh:
        return Matrix.from_json(json.load(fh))


def eval_matrix(m: Matrix, v: Mapping[str, str], f) -> str:
    cache: dict = {}

    def ev(g):
        if g is Falsum:
            return m.least
        if isinstance(g, Var):
            if g.name not in v:
                raise SemanticsError(f"valuation has no value for {g.name}")
            return v[g.name]
        if isinstance(g, Meta):
            raise SemanticsError("cannot evaluate a schema with metavariables")
        key = fkey(g)
        if key in cache:
            return cache[key]
        table = m.tables.get(g.conn)
        if table is None:
            raise SemanticsError(f"matrix {m.name} has no table for {g.conn}")
        out = table[tuple(ev(a) for a in g.args)]
        cache[key] = out
        return out

    return ev(f)


def sequent_holds_ordered(m: Matrix, v: Mapping[str, str], s: Sequent) -> bool:
    """``min(ante) <= max(succ)``; the two-valued case is classical truth."""
    lo = m.min(eval_matrix(m, v, f) for f in s.ante)
    hi = m.max(eval_matrix(m, v, f) for f in s.succ)
    return m.leq(lo, hi)


def sequent_holds_matrix(m: Matrix, v: Mapping[str, str], s: Sequent) -> bool:
    if len(s.succ) > 1:
        raise SemanticsError("matrix satisfaction is defined for at most one succedent formula")
    return sequent_holds_ordered(m, v, s)


def valuations(m: Matrix, names: Sequence[str]):
    for combo in itertools.product(m.values, repeat=len(names)):
        yield dict(zip(names, combo))


def find_refuting_valuation(m: Matrix, s: Sequent, cap: int = 8) -> dict | None:
    """First refuting valuation, variables sorted by name and values least first."""
    if len(s.succ) > 1:
        raise SemanticsError("matrix refutation is defined for at most one succedent formula")
    names = sorted(s.variables())
    if len(names) > cap:
        raise SemanticsError(f"{len(names)} variables exceed the cap of {cap}")
    for v in valuations(m, names):
        if not sequent_holds_ordered(m, v, s):
            return v
    return None


# two-valued helpers --------------------------------------------------------


def eval2(f, v: Mapping[str, bool]) -> bool:
    return eval_matrix(TWO_VALUED, {k: "1" if b else "0" for k, b in v.items()}, f) == "1"


def classically_valid(s: Sequent) -> bool:
    return find_classical_refutation(s) is None


def find_classical_refutation(s: Sequent) -> dict | None:
    names = sorted(s.variables())
    for combo in itertools.product((False, True), repeat=len(names)):
        v = dict(zip(names, combo))
        if all(eval2(f, v) for f in s.ante) and not any(eval2(f, v) for f in s.succ):
            return v
    return None


# rule soundness ----------------------------------------------------------------


@dataclass(frozen=True)
class RuleCounterexample:
    """Valuation of the rule's metavariables plus the context slots used
    (``None`` when the slot was left empty)."""

    valuation: dict = field(hash=False)
    gamma: str | None = None
    delta: str | None = None


def _fresh(rule: RuleSchema) -> dict:
    return {m: Var(m) for m in sorted(rule.metavariables())}


def _instances(rule: RuleSchema, gamma: tuple, delta: tuple, gamma2: tuple = ()):
    """Concrete premises and conclusion with the context slots filled."""
    b = _fresh(rule)
    if rule.is_cut:
        A = b["A"]
        return [Sequent(gamma, (A,)), Sequent((A,) + gamma2, delta)], Sequent(gamma + gamma2, delta)

    def build(part):
        left = tuple(substitute(f, b) for f in part.left) + (gamma if rule.left_context else ())
        right = (delta if part.context else ()) + tuple(substitute(f, b) for f in part.right)
        return Sequent(left, right)

    return [build(p) for p in rule.premises], build(rule.conclusion)


def rule_matrix_sound(m: Matrix, rule: RuleSchema, regime: str = MULTI) -> RuleCounterexample | None:
    """``None`` when the rule preserves ordered-matrix satisfaction under every
    valuation, else the first counterexample.

    One fresh variable stands for the whole antecedent context: the minimum of
    several values is again one of the values, so a single variable ranging
    over the matrix covers every context.  The succedent context is handled
    the same way with the maximum.  Empty contexts are tried first.
    """
    G, G2, D = Var("_G"), Var("_G2"), Var("_D")
    ctx_g = [((), None), ((G,), "_G")]
    ctx_d = [((), None), ((D,), "_D")]
    names = sorted(rule.metavariables())
    for (gamma, gname), (delta, dname) in itertools.product(ctx_g, ctx_d):
        extra = [n for n in (gname, dname) if n]
        gamma2 = ()
        if rule.is_cut and gamma:
            gamma2 = (G2,)
            extra.append("_G2")
        prems, concl = _instances(rule, gamma, delta, gamma2)
        for v in valuations(m, names + extra):
            if all(sequent_holds_ordered(m, v, p) for p in prems) and not sequent_holds_ordered(m, v, concl):
                return RuleCounterexample({k: v[k] for k in names}, v.get("_G"), v.get("_D"))
    return None


# --------------------------------------------------------------------------
# Kripke models

DISJUNCTIVE = "disjunctive"  # A || B  as  ~A + ~B
CONJUNCTIVE = "conjunctive"  # A || B  as  ~(A & B)
HP_READINGS = (DISJUNCTIVE, CONJUNCTIVE)


@dataclass(frozen=True)
class KripkeModel:
    """``order`` holds the reflexive-transitive closure of the declared pairs."""

    worlds: tuple[str, ...]
    order: frozenset
    val: Mapping[str, frozenset] = field(hash=False)
    hp_reading: str = DISJUNCTIVE

    @classmethod
    def build(cls, worlds: Sequence[str], pairs: Iterable[tuple[str, str]],
              val: Mapping[str, Iterable[str]], hp_reading: str = DISJUNCTIVE) -> "KripkeModel":
        worlds = tuple(worlds)
        if not worlds:
            raise SemanticsError("a Kripke model needs at least one world")
        if len(set(worlds)) != len(worlds):
            raise SemanticsError("duplicate world names")
        ws = set(worlds)
        rel = {(w, w) for w in worlds}
        for a, b in pairs:
            if a not in ws or b not in ws:
                raise SemanticsError(f"order mentions unknown world in ({a}, {b})")
            rel.add((a, b))
        changed = True
        while changed:
            changed = False
            for (a, b), (c, d) in list(itertools.product(rel, rel)):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
        unknown = set(val) - ws
        if unknown:
            raise SemanticsError(f"valuation mentions unknown worlds {sorted(unknown)}")
        if hp_reading not in HP_READINGS:
            raise SemanticsError(f"unknown reading {hp_reading!r}")
        model = cls(worlds, frozenset(rel), {w: frozenset(val.get(w, ())) for w in worlds}, hp_reading)
        model.validate()
        return model

    def validate(self) -> None:
        for a, b in self.order:
            if not self.val[a] <= self.val[b]:
                raise SemanticsError(f"valuation not monotone from {a} to {b}")

    def successors(self, w: str) -> list[str]:
        return [u for u in self.worlds if (w, u) in self.order]

    def with_reading(self, reading: str) -> "KripkeModel":
        return KripkeModel(self.worlds, self.order, self.val, reading)

    def to_json(self) -> dict:
        pairs = sorted(p for p in self.order if p[0] != p[1])
        return {"worlds": list(self.worlds), "order": [list(p) for p in pairs],
                "val": {w: sorted(self.val[w]) for w in self.worlds}, "hp_reading": self.hp_reading}

    @classmethod
    def from_json(cls, data: dict) -> "KripkeModel":
        return cls.build([str(w) for w in data["worlds"]], [tuple(map(str, p)) for p in data.get("order", [])],
                         {str(k): v for k, v in data.get("val", {}).items()},
                         data.get("hp_reading", DISJUNCTIVE))


class Forcing:
    """Memoized forcing relation of one model."""

    def __init__(self, model: KripkeModel):
        self.m = model
        self.up = {w: model.successors(w) for w in model.worlds}
        self.cache: dict = {}

    def __call__(self, w: str, f) -> bool:
        key = (w, fkey(f) if not isinstance(f, Var) else f.name)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        out = self._force(w, f)
        self.cache[key] = out
        return out

    def _nowhere(self, w, f) -> bool:
        return not any(self(u, f) for u in self.up[w])

    def _force(self, w, f) -> bool:
        if f is Falsum:
            return False
        if isinstance(f, Var):
            return f.name in self.m.val[w]
        if isinstance(f, Meta):
            raise SemanticsError("cannot force a schema with metavariables")
        c, args = f.conn, f.args
        if c == "nand":
            a, b = args
            return not any(self(u, a) and self(u, b) for u in self.up[w])
        if c == "hp":
            a, b = args
            if self.m.hp_reading == CONJUNCTIVE:
                return not any(self(u, a) and self(u, b) for u in self.up[w])
            return self._nowhere(w, a) or self._nowhere(w, b)
        if c == "nor":
            a, b = args
            return not any(self(u, a) or self(u, b) for u in self.up[w])
        if c == "not":
            return self._nowhere(w, args[0])
        if c == "and":
            return self(w, args[0]) and self(w, args[1])
        if c == "or":
            return self(w, args[0]) or self(w, args[1])
        if c == "imp":
            a, b = args
            return all(self(u, b) for u in self.up[w] if self(u, a))
        raise SemanticsError(f"no Kripke clause for connective {c!r}")


KRIPKE_CONNECTIVES = frozenset({"nand", "hp", "nor", "not", "and", "or", "imp"})


def kripke_forces(model: KripkeModel, w: str, f) -> bool:
    if w not in model.val:
        raise SemanticsError(f"unknown world {w!r}")
    return Forcing(model)(w, f)


def kripke_refutes(model: KripkeModel, s: Sequent, forcing: Forcing | None = None) -> str | None:
    """First world forcing the antecedent but not the succedent."""
    if len(s.succ) > 1:
        raise SemanticsError("Kripke refutation is defined for at most one succedent formula")
    force = forcing or Forcing(model)
    for w in model.worlds:
        if all(force(w, f) for f in s.ante) and not any(force(w, f) for f in s.succ):
            return w
    return None


def sequent_valid_in(model: KripkeModel, s: Sequent, forcing: Forcing | None = None) -> bool:
    return kripke_refutes(model, s, forcing) is None


# small-model enumeration -----------------------------------------------------


def _posets(n: int) -> list[frozenset]:
    """Partial orders on worlds 0..n-1, one per isomorphism class."""
    worlds = range(n)
    pairs = [(a, b) for a in worlds for b in worlds if a != b]
    seen, out = set(), []
    for bits in itertools.product((False, True), repeat=len(pairs)):
        rel = {(a, a) for a in worlds} | {p for p, b in zip(pairs, bits) if b}
        if any((b, a) in rel for a, b in rel if a != b):
            continue
        if any((a, d) not in rel for a, b in rel for c, d in rel if b == c):
            continue
        canon = min(tuple(sorted((perm[a], perm[b]) for a, b in rel))
                    for perm in itertools.permutations(worlds))
        if canon in seen:
            continue
        seen.add(canon)
        out.append(frozenset(rel))
    return out


def _upsets(n: int, rel: frozenset) -> list[frozenset]:
    out = []
    for bits in itertools.product((False, True), repeat=n):
        s = {i for i in range(n) if bits[i]}
        if all(b in s for a, b in rel if a in s):
            out.append(frozenset(s))
    return out


def small_models(atoms: Sequence[str], max_worlds: int = 3, reading: str = DISJUNCTIVE):
    """Every model with at most ``max_worlds`` worlds, up to isomorphism of the frame."""
    for n in range(1, max_worlds + 1):
        for rel in _posets(n):
            ups = _upsets(n, rel)
            names = [f"w{i}" for i in range(n)]
            order = frozenset((names[a], names[b]) for a, b in rel)
            for choice in itertools.product(ups, repeat=len(atoms)):
                val = {names[i]: frozenset(a for a, up in zip(atoms, choice) if i in up) for i in range(n)}
                yield KripkeModel(tuple(names), order, val, reading)


@lru_cache(maxsize=None)
def kripke_rule_sound(rule: RuleSchema, reading: str = DISJUNCTIVE, max_worlds: int = 3) -> bool:
    """Model-wise soundness of a single-succedent rule on all small models:
    whenever every premise is valid in a model so is the conclusion."""
    G, D = Var("_G"), Var("_D")
    names = sorted(rule.metavariables())
    for gamma in ((), (G,)):
        for delta in ((), (D,)):
            prems, concl = _instances(rule, gamma, delta, (Var("_G2"),) if rule.is_cut and gamma else ())
            if any(len(s.succ) > 1 for s in (*prems, concl)):
                continue
            atoms = names + sorted({v for s in (*prems, concl) for v in s.variables()} - set(names))
            for model in small_models(atoms, max_worlds, reading):
                force = Forcing(model)
                if all(sequent_valid_in(model, p, force) for p in prems) and not sequent_valid_in(model, concl, force):
                    return False
    return True


def admissible_readings(rules: Iterable[RuleSchema]) -> list[str]:
    """Readings of ``||`` under which every rule mentioning it passes the
    small-model soundness check.  All readings qualify when no rule mentions it."""
    rules = [r for r in rules if r.connective == "hp"]
    return [rd for rd in HP_READINGS if all(kripke_rule_sound(r, rd) for r in rules)]


# countermodel construction ------------------------------------------------------


class _Tableau:
    """Signed tableau over the forcing clauses.

    A world is described by the formulas it must force (``T``, inherited by
    every later world) and the formulas it must not force (``F``).  Local
    clauses branch inside the world; a false clause that needs a later world
    either holds at the world itself (when the new obligations are already
    forced there; monotonicity makes this choice safe) or opens a successor
    whose forced set strictly grows, which bounds the depth.
    """

    def __init__(self, reading: str, max_worlds: int):
        self.reading = reading
        self.max_worlds = max_worlds
        self.worlds_made = 0
        self.failed: set = set()

    def t_rule(self, f):
        if isinstance(f, Var):
            return None
        c, a = f.conn, f.args
        if c == "and":
            return [({a[0], a[1]}, set())]
        if c == "or":
            return [({a[0]}, set()), ({a[1]}, set())]
        if c == "imp":
            return [(set(), {a[0]}), ({a[1]}, set())]
        if c == "not":
            return [(set(), {a[0]})]
        if c == "nand" or (c == "hp" and self.reading == CONJUNCTIVE):
            return [(set(), {a[0]}), (set(), {a[1]})]
        if c == "nor":
            return [(set(), {a[0], a[1]})]
        if c == "hp":
            return [({Comp("not", (a[0],))}, set()), ({Comp("not", (a[1],))}, set())]
        raise SemanticsError(f"no Kripke clause for connective {c!r}")

    def f_rule(self, f):
        """("static", alternatives) or ("dynamic", options) or None."""
        if isinstance(f, Var):
            return None
        c, a = f.conn, f.args
        if c == "and":
            return "static", [(set(), {a[0]}), (set(), {a[1]})]
        if c == "or":
            return "static", [(set(), {a[0], a[1]})]
        if c == "imp":
            return "dynamic", [({a[0]}, {a[1]})]
        if c == "not":
            return "dynamic", [({a[0]}, set())]
        if c == "nand" or (c == "hp" and self.reading == CONJUNCTIVE):
            return "dynamic", [({a[0], a[1]}, set())]
        if c == "nor":
            return "dynamic", [({a[0]}, set()), ({a[1]}, set())]
        if c == "hp":
            return "static", [(set(), {Comp("not", (a[0],)), Comp("not", (a[1],))})]
        raise SemanticsError(f"no Kripke clause for connective {c!r}")

    def saturate(self, T, F, dT, dF, reqs):
        if Falsum in T or T & F:
            return
        pend = sorted(T - dT, key=fkey)
        if pend:
            f = pend[0]
            alts = self.t_rule(f) or [(set(), set())]
            for addT, addF in alts:
                yield from self.saturate(T | addT, F | addF, dT | {f}, dF, reqs)
            return
        pend = sorted(F - dF, key=fkey)
        if pend:
            f = pend[0]
            rule = self.f_rule(f)
            if rule is None:
                yield from self.saturate(T, F, dT, dF | {f}, reqs)
                return
            kind, alts = rule
            if kind == "static":
                for addT, addF in alts:
                    yield from self.saturate(T | addT, F | addF, dT, dF | {f}, reqs)
            else:
                yield from self.saturate(T, F, dT, dF | {f}, reqs + (tuple(alts),))
            return
        # every formula processed; settle requirements that now hold locally
        for i, opts in enumerate(reqs):
            local = [(tp, fp) for tp, fp in opts if tp <= T]
            if not local:
                continue
            rest = reqs[:i] + reqs[i + 1:]
            for _, fp in local:
                yield from self.saturate(T, F | fp, dT, dF, rest)
            return
        yield T, F, reqs

    def build(self, T: frozenset, F: frozenset):
        key = (T, F)
        if key in self.failed:
            return None
        for T1, F1, reqs in self.saturate(frozenset(T), frozenset(F), frozenset(), frozenset(), ()):
            kids = []
            for opts in reqs:
                sub = None
                for tp, fp in opts:
                    sub = self.build(frozenset(T1 | tp), frozenset(fp))
                    if sub is not None:
                        break
                if sub is None:
                    break
                kids.append(sub)
            else:
                self.worlds_made += 1
                if self.worlds_made > self.max_worlds:
                    raise SemanticsError("countermodel construction exceeded its world cap")
                return (T1, kids)
        self.failed.add(key)
        return None


def find_kripke_countermodel(s: Sequent, reading: str = DISJUNCTIVE, max_worlds: int = 100_000):
    """A finite tree model refuting ``s`` at its root ``w0``, or ``None`` when
    ``s`` is valid under the forcing clauses."""
    if len(s.succ) > 1:
        raise SemanticsError("Kripke refutation is defined for at most one succedent formula")
    tab = _Tableau(reading, max_worlds)
    tree = tab.build(frozenset(s.ante), frozenset(s.succ))
    if tree is None:
        return None
    worlds, pairs, val = [], [], {}
    stack = [(tree, None)]
    while stack:
        (T, kids), parent = stack.pop()
        name = f"w{len(worlds)}"
        worlds.append(name)
        val[name] = {f.name for f in T if isinstance(f, Var)}
        if parent is not None:
            pairs.append((parent, name))
        for k in reversed(kids):
            stack.append((k, name))
    return KripkeModel.build(worlds, pairs, val, reading)
