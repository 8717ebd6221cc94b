"""Translations between single-succedent sequent proofs and natural deduction,
and the classical shift between multi-succedent and single-succedent proofs.

All translations walk their input with an explicit work-list, so very tall
proofs do not hit the interpreter's recursion limit.
"""

from __future__ import annotations

from collections import Counter
from typing import Sequence

from .formula import Comp, Falsum, match, substitute
from .nd import (
    Assume, Infer, _Fresh, _open_map, _postorder, check_derivation, graft,
    match_nd, open_assumptions, relabel,
)
from .rulegen import (
    CLASSICAL_ELIM, ELIM, FALSUM_INTRO, INTRO, MULTI, RuleSchema, RuleSet,
    builtin_ruleset, derive_nd_rules, nd_correspondence, nd_name_for,
)
from .sequent import Sequent, SequentProof, _msub, check_proof, match_instance, weaken_to


class TranslationError(ValueError):
    pass


def _postorder_proof(p: SequentProof) -> list[SequentProof]:
    out, seen = [], set()
    stack = [(p, False)]
    while stack:
        n, done = stack.pop()
        if done:
            out.append(n)
            continue
        if id(n) in seen:
            continue
        seen.add(id(n))
        stack.append((n, True))
        for c in reversed(n.children):
            stack.append((c, False))
    return out


def _with_nd(rs: RuleSet) -> RuleSet:
    return rs if rs.nd_rules else derive_nd_rules(rs)


def _inst(fs, b) -> tuple:
    return tuple(substitute(f, b) for f in fs)


def _concl(succ: Sequence):
    return succ[0] if succ else Falsum


# --------------------------------------------------------------------------
# sequent -> natural deduction


def _falsum_from(neg_a, a, d_a, rs: RuleSet, fresh: _Fresh):
    """Derive falsum from an assumption of ``neg_a`` and a derivation of ``a``
    using an elimination rule whose minors all ask for ``a``."""
    for r in rs.nd_rules:
        if r.kind != ELIM or r.conclusion.formulas or r.conclusion.context:
            continue
        b = match(r.premises[0].formulas[0], neg_a, {})
        if b is None:
            continue
        minors = r.premises[1:]
        if all(not m.discharge and _inst(m.formulas, b) == (a,) for m in minors):
            label = fresh()
            kids = (Assume(neg_a, label),) + tuple(d_a for _ in minors)
            return Infer(r.name, Falsum, kids), label
    raise TranslationError(f"no elimination rule yields falsum from {neg_a!r} and its argument")


def sequent_to_nd(p: SequentProof, rs: RuleSet, check: bool = True):
    """Natural-deduction derivation of the end-sequent's succedent (or falsum)
    whose open assumptions lie within the antecedent."""
    if rs.regime == MULTI:
        raise TranslationError("only single-succedent proofs translate to natural deduction")
    rs = _with_nd(rs)
    if check:
        v = check_proof(p, rs)
        if not v.ok:
            raise TranslationError(f"input proof is not valid: {v}")
    rules = {r.name: r for r in rs.sequent_rules}
    nd_names = {r.name for r in rs.nd_rules}
    fresh = _Fresh(0)
    out: dict[int, object] = {}
    opens: dict[int, dict] = {}  # open assumptions of each result, kept incrementally

    def closing(d_open: dict, formulas) -> frozenset:
        want = set(formulas)
        return frozenset(l for l, f in d_open.items() if f in want)

    for n in _postorder_proof(p):
        kids = [out[id(c)] for c in n.children]
        kid_open = [opens[id(c)] for c in n.children]
        rule = rules[n.rule]
        if n.rule == "ax":
            leaf = Assume(n.conclusion.succ[0], fresh())
            out[id(n)], opens[id(n)] = leaf, {leaf.label: leaf.formula}
            continue
        if n.rule in ("WL", "CL"):
            out[id(n)], opens[id(n)] = kids[0], kid_open[0]
            continue
        b = match_instance(rule, n.conclusion, [c.conclusion for c in n.children])
        if rule.is_cut:
            g = graft(kids[1], b["A"], kids[0], fresh)
            out[id(n)], opens[id(n)] = g, open_assumptions(g)
            continue
        name = nd_name_for(rule, False)
        if name is None or name not in nd_names:
            raise TranslationError(f"rule {n.rule} has no natural-deduction counterpart in {rs.name}")
        concl = _concl(n.conclusion.succ)
        if n.rule == "WR'":
            node, dis, inputs = Infer(name, concl, (kids[0],)), [frozenset()], kid_open
        elif rule.side == "right":
            dis = [closing(o, _inst(prem.left, b)) for prem, o in zip(rule.premises, kid_open)]
            node, inputs = Infer(name, concl, tuple(kids), tuple(dis)), kid_open
        elif rule.side == "left":
            major = Assume(substitute(rule.principal, b), fresh())
            dis = [frozenset()] + [closing(o, _inst(prem.left, b)) for prem, o in zip(rule.premises, kid_open)]
            node = Infer(name, concl, (major, *kids), tuple(dis))
            inputs = [{major.label: major.formula}] + kid_open
        elif rule.side == "classical":
            neg_a = _inst(rule.premises[0].left, b)[0]
            bot, lab = _falsum_from(neg_a, concl, kids[0], rs, fresh)
            dis = [closing(kid_open[0], (neg_a,)) | {lab}]
            node, inputs = Infer(name, concl, (bot,), (frozenset(dis[0]),)), kid_open
        else:
            raise TranslationError(f"cannot translate rule {n.rule}")
        acc: dict = {}
        for o, closed in zip(inputs, dis):
            acc.update((l, f) for l, f in o.items() if l not in closed)
        out[id(n)], opens[id(n)] = node, acc
    d = out[id(p)]
    # one label per open formula keeps the open multiset inside the antecedent
    merge: dict[int, int] = {}
    first: dict = {}
    for lab, f in sorted(open_assumptions(d).items()):
        merge[lab] = first.setdefault(f, lab)
    if any(k != v for k, v in merge.items()):
        d = relabel(d, {k: v for k, v in merge.items() if k != v})
    return d


# --------------------------------------------------------------------------
# natural deduction -> sequent


def _contract(p: SequentProof, target: Counter) -> SequentProof:
    have = Counter(p.conclusion.ante)
    cur = p
    for f, k in have.items():
        for _ in range(k - max(target[f], 1)):
            ante = list(cur.conclusion.ante)
            ante.remove(f)
            cur = SequentProof(Sequent(tuple(ante), cur.conclusion.succ), "CL", (cur,))
    return cur


def fit(p: SequentProof, ante: Sequence, succ: Sequence, single: bool = True) -> SequentProof:
    """Contract and weaken ``p`` so that it concludes exactly ``ante => succ``."""
    if p.conclusion == Sequent(ante, succ):
        return p
    target = Counter(ante)
    have = Counter(p.conclusion.ante)
    if any(f not in target for f in have):
        raise TranslationError("cannot drop antecedent formulas that the target lacks")
    cur = _contract(p, target)
    return weaken_to(cur, tuple(ante), tuple(succ), single)


def nd_to_sequent(d, rs: RuleSet, check: bool = True) -> SequentProof:
    """Sequent proof of ``open assumptions => conclusion``."""
    if rs.regime == MULTI:
        raise TranslationError("multiple-conclusion derivations are check-only")
    rs = _with_nd(rs)
    if check:
        v = check_derivation(d, rs)
        if not v.ok:
            raise TranslationError(f"input derivation is not valid: {v}")
    seq_rule = nd_correspondence(rs)
    nd_rules = {r.name: r for r in rs.nd_rules}
    opens = _open_map(d)
    out: dict[int, SequentProof] = {}

    def ante_of(n) -> tuple:
        return tuple(opens[id(n)].values())

    for n in _postorder(d):
        if id(n) in out:
            continue
        if isinstance(n, Assume):
            out[id(n)] = SequentProof(Sequent((n.formula,), (n.formula,)), "ax")
            continue
        rule = nd_rules[n.rule]
        srule = seq_rule.get(n.rule)
        if srule is None:
            raise TranslationError(f"ND rule {n.rule} has no sequent counterpart")
        kids = [out[id(c)] for c in n.children]
        b = match_nd(rule, n, [c.conclusion for c in n.children], [opens[id(c)] for c in n.children])
        gamma = ante_of(n)
        succ = () if n.conclusion is Falsum else (n.conclusion,)
        if rule.kind == FALSUM_INTRO:
            res = SequentProof(Sequent(kids[0].conclusion.ante, succ), srule.name, (kids[0],))
        elif rule.kind == INTRO:
            prems = []
            for ps, k in zip(srule.premises, kids):
                prems.append(fit(k, gamma + _inst(ps.left, b), _inst(ps.right, b)))
            res = SequentProof(Sequent(gamma, succ), srule.name, tuple(prems))
        elif rule.kind == ELIM:
            minor_classes: dict = {}
            for c, dis in zip(n.children[1:], n.discharged[1:]):
                minor_classes.update({l: f for l, f in opens[id(c)].items() if l not in dis})
            gm = tuple(minor_classes.values())
            prems = []
            for ps, k in zip(srule.premises, kids[1:]):
                right = _inst(ps.right, b) + (succ if ps.context else ())
                prems.append(fit(k, gm + _inst(ps.left, b), right))
            principal = substitute(srule.principal, b)
            lsucc = succ if srule.conclusion.context else ()
            left = SequentProof(Sequent((principal,) + gm, lsucc), srule.name, tuple(prems))
            major = kids[0]
            cut = SequentProof(Sequent(major.conclusion.ante + gm, lsucc), "cut", (major, left))
            res = _contract(cut, Counter(gamma))
            if Counter(res.conclusion.ante) != Counter(gamma):
                res = fit(res, gamma, lsucc)
            if lsucc != succ:
                res = weaken_to(res, gamma, succ, True)
        elif rule.kind == CLASSICAL_ELIM:
            neg_a = _inst(srule.premises[0].left, b)[0]
            body = fit(kids[0], (neg_a,) + gamma, ())
            body = SequentProof(Sequent(body.conclusion.ante, succ), "WR'", (body,))
            res = SequentProof(Sequent(gamma, succ), srule.name, (body,))
        else:
            raise TranslationError(f"cannot translate ND rule {n.rule}")
        out[id(n)] = res
    return out[id(d)]


# --------------------------------------------------------------------------
# classical shift


def negation_of(rs: RuleSet):
    """``A -> not A`` for the rule set: a primitive unary negation if present,
    otherwise ``A|A``."""
    sig = rs.signature
    for c in sig.connectives:
        if c.name == "not" and c.arity == 1:
            return lambda a, s=c.name: Comp(s, (a,))
    for c in sig.connectives:
        if c.name == "nand":
            return lambda a, s=c.name: Comp(s, (a, a))
    raise TranslationError(f"{rs.name} has neither a negation nor a stroke")


def _is_negation(f, neg) -> object | None:
    if isinstance(f, Comp) and f.args and neg(f.args[0]) == f:
        return f.args[0]
    return None


def _target_rule(rules: dict[str, RuleSchema], r: RuleSchema) -> RuleSchema:
    name = r.origin or r.name
    if name.endswith("'"):
        name = name[:-1]
    t = rules.get(name)
    if t is None:
        raise TranslationError(f"no multi-succedent counterpart for rule {r.name}")
    return t


def _cut(left: SequentProof, right: SequentProof, a) -> SequentProof:
    ls, ra = list(left.conclusion.succ), list(right.conclusion.ante)
    ls.remove(a)
    ra.remove(a)
    return SequentProof(Sequent(left.conclusion.ante + tuple(ra), tuple(ls) + right.conclusion.succ),
                        "cut", (left, right))


def _excluded_middle(a, neg, target: RuleSet) -> SequentProof:
    """A proof of ``=> a, not a`` in the multi-succedent calculus."""
    from .prover import Provable, prove_classical
    res = prove_classical(Sequent((), (a, neg(a))), target)
    if not isinstance(res, Provable):
        raise TranslationError(f"{target.name} does not prove excluded middle for {a!r}")
    return res.proof


def classical_shift(p: SequentProof, delta: Sequence, rs: RuleSet | None = None,
                    target: RuleSet | None = None, check: bool = True) -> SequentProof:
    """From ``Gamma, not Delta => A`` (single-succedent, classical) to
    ``Gamma => Delta, A`` (multi-succedent).

    ``delta`` lists the designated antecedent occurrences, each a negation.
    """
    rs = rs or builtin_ruleset("LS-single-classical")
    target = target or builtin_ruleset("LS")
    if check:
        v = check_proof(p, rs)
        if not v.ok:
            raise TranslationError(f"input proof is not valid: {v}")
    neg = negation_of(rs)
    unneg = []
    for f in delta:
        a = _is_negation(f, neg)
        if a is None:
            raise TranslationError(f"designated formula {f!r} is not a negation")
        unneg.append(a)
    if _msub(Counter(p.conclusion.ante), Counter(delta)) is None:
        raise TranslationError("designated formulas are not in the antecedent")
    rules = {r.name: r for r in target.sequent_rules}
    out: dict[int, SequentProof] = {}
    for n in _postorder_proof(p):
        kids = [out[id(c)] for c in n.children]
        rule = {r.name: r for r in rs.sequent_rules}[n.rule]
        c = n.conclusion
        if n.rule in ("ax", "WL", "CL", "cut"):
            out[id(n)] = SequentProof(c, n.rule, tuple(kids))
        elif n.rule == "WR'":
            out[id(n)] = SequentProof(c, "WR", tuple(kids))
        elif rule.side == "classical":
            # not A, G => A  ~~>  G => A, A by cut with => A, not A; then CR
            a = c.succ[0]
            em = _excluded_middle(a, neg, target)
            both = _cut(em, kids[0], neg(a))
            out[id(n)] = SequentProof(c, "CR", (both,))
        else:
            t = _target_rule(rules, rule)
            b = match_instance(rule, c, [k.conclusion for k in n.children])
            delta_c = c.succ if t.conclusion.context and rule.side == "left" else ()
            prems = []
            for ps, k in zip(t.premises, kids):
                right = (delta_c if ps.context else ()) + _inst(ps.right, b)
                prems.append(weaken_to(k, k.conclusion.ante, right, False))
            out[id(n)] = SequentProof(c, t.name, tuple(prems))
    cur = out[id(p)]
    for f, a in zip(delta, unneg):
        cur = _cut(_excluded_middle(a, neg, target), cur, f)
    # present the result as Gamma => Delta, A
    want = Sequent(cur.conclusion.ante, tuple(unneg) + tuple(p.conclusion.succ))
    if want != cur.conclusion:
        raise TranslationError("internal: shifted end-sequent is off")
    return SequentProof(want, cur.rule, cur.children, cur.binding)


def _neg_left(p: SequentProof, a, neg, single_rules: list[RuleSchema]) -> SequentProof:
    """From ``G => a`` derive ``not a, G =>`` with the negation's left rule."""
    na = neg(a)
    g = p.conclusion.ante
    for r in single_rules:
        if r.side != "left":
            continue
        b = match(r.principal, na, {})
        if b is None:
            continue
        prems = [Sequent(g + _inst(ps.left, b), _inst(ps.right, b)) for ps in r.premises]
        if all(s == p.conclusion for s in prems):
            return SequentProof(Sequent((na,) + g, ()), r.name, tuple(p for _ in prems))
    raise TranslationError(f"no left rule turns a proof of {a!r} into one refuting its negation")


def _classical_rule(rs: RuleSet) -> RuleSchema:
    for r in rs.sequent_rules:
        if r.side == "classical":
            return r
    raise TranslationError(f"{rs.name} has no classical rule")


def _reductio(p: SequentProof, a, neg, crule: RuleSchema) -> SequentProof:
    """From ``not a, G =>`` derive ``G => a`` (WR' then the classical rule)."""
    ante = list(p.conclusion.ante)
    ante.remove(neg(a))
    w = SequentProof(Sequent(p.conclusion.ante, (a,)), "WR'", (p,))
    return SequentProof(Sequent(tuple(ante), (a,)), crule.name, (w,))


def classical_unshift(p: SequentProof, delta: Sequence, rest: Sequence, rs: RuleSet | None = None,
                      target: RuleSet | None = None, check: bool = True) -> SequentProof:
    """From ``Gamma => Delta, Delta'`` (multi-succedent) to
    ``Gamma, not Delta => Delta'`` (single-succedent, classical).

    Every multi-succedent sequent ``G => D`` is carried as ``G, not D =>``;
    the last step recovers ``Delta'`` with the classical rule.
    """
    rs = rs or builtin_ruleset("LS")
    target = target or builtin_ruleset("LS-single-classical")
    rest = tuple(rest)
    if len(rest) > 1:
        raise TranslationError("at most one formula may stay in the succedent")
    if Counter(delta) + Counter(rest) != Counter(p.conclusion.succ):
        raise TranslationError("delta and rest must partition the succedent")
    if check:
        v = check_proof(p, rs)
        if not v.ok:
            raise TranslationError(f"input proof is not valid: {v}")
    neg = negation_of(target)
    crule = _classical_rule(target)
    single_rules = [r for r in target.sequent_rules]
    by_origin: dict[str, RuleSchema] = {}
    for r in target.sequent_rules:
        if r.side in ("left", "right"):
            by_origin.setdefault(r.origin or r.name, r)
    src_rules = {r.name: r for r in rs.sequent_rules}
    out: dict[int, SequentProof] = {}
    for n in _postorder_proof(p):
        kids = [out[id(c)] for c in n.children]
        c = n.conclusion
        negs = tuple(neg(f) for f in c.succ)
        goal = Sequent(c.ante + negs, ())
        rule = src_rules[n.rule]
        if n.rule == "ax":
            a = c.succ[0]
            res = _neg_left(SequentProof(Sequent((a,), (a,)), "ax"), a, neg, single_rules)
        elif n.rule in ("WL", "WR"):
            res = SequentProof(goal, "WL", (kids[0],))
        elif n.rule in ("CL", "CR"):
            res = SequentProof(goal, "CL", (kids[0],))
        elif rule.is_cut:
            b = match_instance(rule, c, [k.conclusion for k in n.children])
            a = b["A"]
            left = _reductio(kids[0], a, neg, crule)
            res = _cut(left, kids[1], a)
        elif rule.side in ("left", "right"):
            t = by_origin.get(rule.name)
            if t is None:
                raise TranslationError(f"no single-succedent counterpart for rule {rule.name}")
            b = match_instance(rule, c, [k.conclusion for k in n.children])
            principal = substitute(rule.principal, b)
            d_c = list(c.succ)
            if rule.side == "right":
                d_c.remove(principal)
            base = c.ante if rule.side == "right" else tuple(_drop(c.ante, principal))
            ctx = base + tuple(neg(f) for f in d_c)
            prems = []
            for ps, k in zip(rule.premises, kids):
                right = _inst(ps.right, b)
                if len(right) > 1:
                    raise TranslationError(f"rule {rule.name} has a premise with several succedent auxiliaries")
                k2 = k
                if right:
                    k2 = _reductio(k, right[0], neg, crule)
                prems.append(fit(k2, ctx + _inst(ps.left, b), right))
            if rule.side == "right":
                body = SequentProof(Sequent(ctx, (principal,)), t.name, tuple(prems))
                res = _neg_left(body, principal, neg, single_rules)
            else:
                res = SequentProof(Sequent((principal,) + ctx, ()), t.name, tuple(prems))
        else:
            raise TranslationError(f"cannot shift rule {n.rule}")
        out[id(n)] = fit(res, goal.ante, ())
    cur = out[id(p)]
    for f in rest:
        cur = _reductio(cur, f, neg, crule)
    want = Sequent(p.conclusion.ante + tuple(neg(f) for f in delta), rest)
    if want != cur.conclusion:
        raise TranslationError("internal: unshifted end-sequent is off")
    return SequentProof(want, cur.rule, cur.children, cur.binding)


def _drop(seq, f) -> list:
    out = list(seq)
    out.remove(f)
    return out
