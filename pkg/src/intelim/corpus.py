"""Seeded random formulas, sequents and proof corpora for experiments."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .formula import Comp, Falsum, Var, match, size, substitute
from .nd import Assume, Infer
from .prover import Provable, SearchBudget, decide
from .rulegen import ELIM, INTRO, NDRuleSchema, RuleSet, builtin_ruleset
from .sequent import Sequent

ARITY = {"nand": 2, "hp": 2, "nor": 2, "xor": 2, "not": 1, "and": 2, "or": 2, "imp": 2}


@dataclass(frozen=True)
class CorpusConfig:
    connectives: tuple[str, ...] = ("nand",)
    atoms: tuple[str, ...] = ("p", "q", "r", "s")
    max_ops: int = 12  # connective occurrences in the whole sequent
    max_ante: int = 3
    seed: int = 0
    budget: int = 20_000
    atomic_goal: float = 0.0  # chance of replacing the succedent by an atom


def random_formula(rng: random.Random, conns: Sequence[str], atoms: Sequence[str], ops: int):
    """A formula with exactly ``ops`` connective occurrences."""
    if ops == 0:
        return Var(rng.choice(atoms))
    c = rng.choice(conns)
    if ARITY[c] == 1:
        return Comp(c, (random_formula(rng, conns, atoms, ops - 1),))
    left = rng.randint(0, ops - 1)
    return Comp(c, (random_formula(rng, conns, atoms, left),
                    random_formula(rng, conns, atoms, ops - 1 - left)))


def random_sequent(rng: random.Random, cfg: CorpusConfig, single: bool = True) -> Sequent:
    n_ante = rng.randint(0, cfg.max_ante)
    n_succ = rng.randint(0, 1) if single else rng.randint(0, 2)
    slots = n_ante + n_succ
    if slots == 0:
        n_ante = slots = 1
    budget = rng.randint(slots, max(slots, cfg.max_ops))
    cuts = sorted(rng.randint(0, budget) for _ in range(slots - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [budget])]
    fs = [random_formula(rng, cfg.connectives, cfg.atoms, k) for k in parts]
    s = Sequent(tuple(fs[:n_ante]), tuple(fs[n_ante:]))
    assert sum(size(f) for f in (*s.ante, *s.succ)) <= cfg.max_ops
    return s


def provable_corpus(rs: RuleSet, n: int, cfg: CorpusConfig = CorpusConfig(), max_tries: int = 100_000,
                    keep=None):
    """``n`` distinct sequents with their kernel-checked proofs in ``rs``.

    ``keep(sequent, proof)`` can reject proofs, e.g. to insist on a rule.

    Random sequents are tried in seeded order; half of the draws are
    biased towards provability by copying the succedent into the antecedent
    under a negation-free wrapper, so small corpora fill quickly.
    """
    rng = random.Random(cfg.seed)
    single = rs.regime != "multi"
    out, seen = [], set()
    budget = SearchBudget(cfg.budget)
    for _ in range(max_tries):
        if len(out) >= n:
            break
        s = random_sequent(rng, cfg, single)
        if cfg.atomic_goal and rng.random() < cfg.atomic_goal:
            s = Sequent(s.ante, (Var(rng.choice(cfg.atoms)),))
        elif rng.random() < 0.5 and s.succ:
            s = Sequent(s.ante + (s.succ[0],), s.succ)
        if sum(size(f) for f in (*s.ante, *s.succ)) > cfg.max_ops:
            continue
        key = s.canonical()
        if key in seen:
            continue
        seen.add(key)
        res = decide(s, rs, budget)
        if isinstance(res, Provable) and (keep is None or keep(s, res.proof)):
            out.append((s, res.proof))
    return out


REDEX_CALCULI = (("LS-single", "NS"), ("LS-nor-single", "LS-nor-single"), ("LS-xor-single", "LS-xor-single"))


def _intro_rooted(rs_seq: RuleSet, rs_nd: RuleSet, cfg: CorpusConfig, want: int, max_size: int):
    from .nd import size as nd_size
    from .translate import sequent_to_nd

    intros = {r.name for r in rs_nd.nd_rules if r.kind == INTRO}
    out = []
    for s, p in provable_corpus(rs_seq, want * 4, cfg):
        if not s.succ or not isinstance(s.succ[0], Comp):
            continue
        d = sequent_to_nd(p, rs_nd)
        if isinstance(d, Infer) and d.rule in intros and nd_size(d) <= max_size:
            out.append(d)
        if len(out) >= want:
            break
    return out


def _eliminate(d, rule: NDRuleSchema, fresh, supply: dict):
    """Apply ``rule`` (an elim for the connective of ``d``'s conclusion) with
    ``d`` as major premise.  Minors come from ``supply`` when a derivation of
    the needed formula is there, else from fresh or discharged assumptions."""
    b = match(rule.premises[0].formulas[0], d.conclusion)
    kids, dis = [d], [frozenset()]
    for prem in rule.premises[1:]:
        closed = {substitute(f, b): fresh() for f in prem.discharge}
        goal = substitute(prem.formulas[0], b)
        if goal in closed:
            kids.append(Assume(goal, closed[goal]))
            dis.append(frozenset({closed[goal]}))
        else:
            kids.append(supply.get(goal) or Assume(goal, fresh()))
            dis.append(frozenset())
    return Infer(rule.name, Falsum, tuple(kids), tuple(dis))


def redex_corpus(n: int, seed: int = 0, max_size: int = 400):
    """``n`` derivations, each with at least one maximal formula, over the
    stroke, the arrow and xor.  Some are stacked: a redex is pushed through
    falsum introduction and reused as the minor premise of another."""
    from .nd import _Fresh, labels, relabel
    from .normalize import default_rules

    rs = default_rules()
    elims: dict[str, list[NDRuleSchema]] = {}
    for r in rs.nd_rules:
        if r.kind == ELIM:
            elims.setdefault(r.connective, []).append(r)
    rng = random.Random(seed)
    pool = []
    per = 12
    for seq_name, nd_name in REDEX_CALCULI:
        cfg = CorpusConfig(connectives=(builtin_ruleset(seq_name).signature.connectives[0].name,),
                           atoms=("p", "q", "r"), max_ops=6, seed=seed)
        pool += _intro_rooted(builtin_ruleset(seq_name), builtin_ruleset(nd_name), cfg, per, max_size)
    if not pool:
        raise ValueError("no intro-rooted derivations found")
    out, seen = [], set()
    for _ in range(50 * n):
        if len(out) >= n:
            break
        d = rng.choice(pool)
        fresh = _Fresh(max(labels(d) | {0}) + 1000)
        supply = {}
        if out and rng.random() < 0.4:
            # stack: a previous redex, lifted to the needed minor formula
            prev = rng.choice(out)
            rule = rng.choice(elims[d.conclusion.conn])
            b = match(rule.premises[0].formulas[0], d.conclusion)
            goal = substitute(rule.premises[-1].formulas[0], b)
            prev = relabel(prev, {lab: fresh() for lab in sorted(labels(prev))})
            supply[goal] = Infer("botI", goal, (prev,))
        rule = rng.choice(elims[d.conclusion.conn])
        r = _eliminate(d, rule, fresh, supply)
        if r not in seen:
            seen.add(r)
            out.append(r)
    if len(out) < n:
        raise ValueError(f"only {len(out)} distinct redex derivations found")
    return out
