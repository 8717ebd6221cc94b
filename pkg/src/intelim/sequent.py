"""Sequents, sequent proofs and the proof-checking kernel.

Sequents are multisets on both sides; exchange is implicit.  Weakening,
contraction and cut are explicit proof nodes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

from .formula import (
    STANDARD, Falsum, ParseError, Signature, fkey, match, parse_formula,
    render_formula, substitute,
)
from .rulegen import MULTI, RuleSchema, RuleSet


class Sequent:
    """``ante => succ`` with multiset equality.  Input order is kept for display."""

    __slots__ = ("ante", "succ", "_canon")

    def __init__(self, ante: Sequence = (), succ: Sequence = ()):
        self.ante = tuple(ante)
        self.succ = tuple(succ)
        for f in (*self.ante, *self.succ):
            if f is Falsum:
                raise ValueError("falsum is not allowed inside sequents; use an empty succedent")
        self._canon = (tuple(sorted(fkey(f) for f in self.ante)), tuple(sorted(fkey(f) for f in self.succ)))

    def __eq__(self, other):
        return isinstance(other, Sequent) and self._canon == other._canon

    def __hash__(self):
        return hash(self._canon)

    def __repr__(self):
        return f"Sequent({list(map(str, self.ante))}, {list(map(str, self.succ))})"

    def render(self, sig: Signature = STANDARD) -> str:
        left = ", ".join(render_formula(f, sig) for f in self.ante)
        right = ", ".join(render_formula(f, sig) for f in self.succ)
        return f"{left} => {right}".strip()

    def canonical(self) -> "Sequent":
        return Sequent(sorted(self.ante, key=fkey), sorted(self.succ, key=fkey))

    def variables(self) -> set[str]:
        from .formula import variables
        out: set[str] = set()
        for f in (*self.ante, *self.succ):
            out |= variables(f)
        return out

    def to_json(self, sig: Signature = STANDARD) -> dict:
        return {"ante": [render_formula(f, sig) for f in self.ante],
                "succ": [render_formula(f, sig) for f in self.succ]}

    @classmethod
    def from_json(cls, d: dict, sig: Signature = STANDARD) -> "Sequent":
        return cls(tuple(parse_formula(x, sig) for x in d.get("ante", [])),
                   tuple(parse_formula(x, sig) for x in d.get("succ", [])))


def _split_top(text: str, offset: int) -> list[tuple[str, int]]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append((text[start:i], offset + start))
            start = i + 1
    parts.append((text[start:], offset + start))
    return [(p, o) for p, o in parts if p.strip()] if any(p.strip() for p, _ in parts) else []


def parse_sequent(text: str, sig: Signature = STANDARD) -> Sequent:
    """``A, B => C``; either side may be empty."""
    if text.count("=>") != 1:
        raise ParseError("a sequent needs exactly one '=>'", 0)
    i = text.index("=>")
    sides = []
    for chunk, off in ((text[:i], 0), (text[i + 2:], i + 2)):
        fs = []
        for part, pos in _split_top(chunk, off):
            try:
                fs.append(parse_formula(part, sig))
            except ParseError as e:
                raise ParseError(e.message, pos + e.pos) from None
        sides.append(tuple(fs))
    return Sequent(*sides)


@dataclass(frozen=True)
class SequentProof:
    conclusion: Sequent
    rule: str
    children: tuple = ()
    binding: tuple | None = None  # sorted (metavariable, formula) pairs, informational only

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def nodes(self) -> Iterator[tuple[tuple[int, ...], "SequentProof"]]:
        stack = [((), self)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((path + (i,), node.children[i]))

    def _fold(self, leaf, combine) -> int:
        # shared subproofs are visited once; the result is the tree-unfolded value
        memo: dict[int, int] = {}
        stack = [(self, False)]
        while stack:
            n, done = stack.pop()
            if id(n) in memo:
                continue
            if done or not n.children:
                memo[id(n)] = combine([memo[id(c)] for c in n.children]) if n.children else leaf
                continue
            stack.append((n, True))
            stack.extend((c, False) for c in n.children if id(c) not in memo)
        return memo[id(self)]

    def size(self) -> int:
        return self._fold(1, lambda xs: 1 + sum(xs))

    def height(self) -> int:
        return self._fold(1, lambda xs: 1 + max(xs))

    def rules_used(self) -> set[str]:
        out, seen, stack = set(), set(), [self]
        while stack:
            n = stack.pop()
            if id(n) not in seen:
                seen.add(id(n))
                out.add(n.rule)
                stack.extend(n.children)
        return out

    def at(self, path: Sequence[int]) -> "SequentProof":
        node = self
        for i in path:
            node = node.children[i]
        return node


@dataclass(frozen=True)
class Verdict:
    ok: bool
    path: tuple = ()
    reason: str = ""

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "Ok" if self.ok else f"Fail at {list(self.path)}: {self.reason}"


OK = Verdict(True)


def Fail(path, reason) -> Verdict:
    return Verdict(False, tuple(path), reason)


class MatchFailure(Exception):
    pass


def _msub(big: Counter, small: Counter) -> Counter | None:
    for k, n in small.items():
        if big[k] < n:
            return None
    out = big.copy()
    out.subtract(small)
    return +out


def _pick(schemas: Sequence, pool: Sequence, binding: dict) -> Iterator[tuple[dict, list[int]]]:
    """Ways of matching each schema to a distinct occurrence of ``pool``,
    trying occurrences left to right."""
    if not schemas:
        yield binding, []
        return
    head, rest = schemas[0], schemas[1:]
    tried = set()
    for i, f in enumerate(pool):
        if f is None or f in tried:
            continue  # equal occurrences give equal remainders
        tried.add(f)
        b = match(head, f, binding)
        if b is None:
            continue
        for b2, used in _pick(rest, pool[:i] + (None,) + pool[i + 1:], b):
            yield b2, [i] + used


def _remove(pool: tuple, idxs: list[int]) -> tuple:
    drop = set(idxs)
    return tuple(f for i, f in enumerate(pool) if i not in drop)


def _ms(fs) -> Counter:
    return Counter(fs)


def _likely_first(side: Sequence, prem_side: Sequence) -> tuple:
    # principal candidates whose multiplicity changes across the inference come
    # first; the order only affects speed, not which instances are found
    if len(side) < 2:
        return tuple(side)
    prem_side = list(prem_side)
    return tuple(sorted(side, key=lambda f: side.count(f) == prem_side.count(f)))


def match_instance(rule: RuleSchema, conclusion: Sequent, premises: Sequence[Sequent]) -> dict:
    """Binding under which ``premises / conclusion`` is an instance of ``rule``.

    Raises :class:`MatchFailure` describing the first mismatch once every
    choice of principal occurrences has been tried.
    """
    if len(premises) != len(rule.premises):
        raise MatchFailure(f"rule {rule.name} takes {len(rule.premises)} premises, got {len(premises)}")
    if rule.is_cut:
        return _match_cut(conclusion, premises)
    first_error = None
    pool_l = _likely_first(conclusion.ante, premises[0].ante if premises else ())
    pool_r = _likely_first(conclusion.succ, premises[0].succ if premises else ())
    for b1, used_l in _pick(rule.conclusion.left, pool_l, {}):
        for b, used_r in _pick(rule.conclusion.right, pool_r, b1):
            gamma = [fkey(f) for f in _remove(pool_l, used_l)]
            delta = [fkey(f) for f in _remove(pool_r, used_r)]
            err = _check_premises(rule, b, gamma, delta, premises)
            if err is None:
                return b
            first_error = first_error or err
    if first_error is None:
        first_error = f"conclusion {conclusion!r} does not have the shape of rule {rule.name}"
    raise MatchFailure(first_error)


def _keys(fs, b) -> list[str]:
    return [fkey(substitute(f, b)) for f in fs]


def _check_premises(rule: RuleSchema, b: dict, gamma: list, delta: list, premises) -> str | None:
    """``gamma``/``delta`` are the context keys left over in the conclusion."""
    if not rule.left_context and gamma:
        return f"rule {rule.name} allows no antecedent context"
    if not rule.conclusion.context and delta:
        return f"rule {rule.name} allows no succedent context in its conclusion"
    try:
        for k, (ps, prem) in enumerate(zip(rule.premises, premises)):
            want_l = tuple(sorted((gamma if rule.left_context else []) + _keys(ps.left, b)))
            want_r = tuple(sorted((delta if ps.context else []) + _keys(ps.right, b)))
            have_l, have_r = prem._canon
            if have_l != want_l:
                return f"premise {k} antecedent does not match rule {rule.name}"
            if have_r != want_r:
                return f"premise {k} succedent does not match rule {rule.name}"
    except Exception as e:  # unbound metavariable in a malformed rule
        return f"rule {rule.name}: {e}"
    return None


def _match_cut(conclusion: Sequent, premises) -> dict:
    left, right = premises
    tried = set()
    for f in left.succ:
        if f in tried:
            continue
        tried.add(f)
        g2 = _msub(_ms(right.ante), Counter([f]))
        if g2 is None:
            continue
        d1 = _msub(_ms(left.succ), Counter([f]))
        if _ms(conclusion.ante) == _ms(left.ante) + g2 and _ms(conclusion.succ) == d1 + _ms(right.succ):
            return {"A": f}
    raise MatchFailure("no cut formula joins the premises into the conclusion")


def succedent_bound(rs: RuleSet) -> int | None:
    return None if rs.regime == MULTI else 1


def check_proof(p: SequentProof, rs: RuleSet) -> Verdict:
    """Kernel check of every node, leaves included, in preorder.

    Subproofs shared between several parents are checked once.
    """
    bound = succedent_bound(rs)
    rules = {r.name: r for r in rs.sequent_rules}
    seen: set[int] = set()
    stack = [((), p)]
    while stack:
        path, node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        for i in range(len(node.children) - 1, -1, -1):
            stack.append((path + (i,), node.children[i]))
        if bound is not None and len(node.conclusion.succ) > bound:
            return Fail(path, f"succedent has {len(node.conclusion.succ)} formulas; at most {bound} allowed")
        rule = rules.get(node.rule)
        if rule is None:
            return Fail(path, f"unknown rule {node.rule!r} in {rs.name}")
        if len(node.children) != len(rule.premises):
            return Fail(path, f"rule {rule.name} takes {len(rule.premises)} premises, node has {len(node.children)}")
        try:
            match_instance(rule, node.conclusion, [c.conclusion for c in node.children])
        except MatchFailure as e:
            return Fail(path, f"mismatch: {e}")
    return OK


def proof_to_json(p: SequentProof, sig: Signature = STANDARD) -> dict:
    out: dict = {}
    stack = [(p, out)]
    while stack:
        node, slot = stack.pop()
        slot["rule"] = node.rule
        slot["sequent"] = node.conclusion.to_json(sig)
        slot["children"] = [{} for _ in node.children]
        stack.extend(zip(node.children, slot["children"]))
    return out


def proof_from_json(d: dict, sig: Signature = STANDARD) -> SequentProof:
    # post-order build without recursion
    order = []
    stack = [d]
    while stack:
        n = stack.pop()
        order.append(n)
        stack.extend(n.get("children", []))
    built: dict[int, SequentProof] = {}
    for n in reversed(order):
        kids = tuple(built[id(c)] for c in n.get("children", []))
        built[id(n)] = SequentProof(Sequent.from_json(n["sequent"], sig), n["rule"], kids)
    return built[id(d)]


def render_proof(p: SequentProof, sig: Signature = STANDARD) -> str:
    """Indented tree, conclusion first."""
    lines = []
    stack = [(p, 0)]
    while stack:
        node, depth = stack.pop()
        lines.append(f"{'  ' * depth}{node.conclusion.render(sig)}    [{node.rule}]")
        stack.extend((c, depth + 1) for c in reversed(node.children))
    return "\n".join(lines)


# --------------------------------------------------------------------------
# small builders used by the prover, the translator and tests


def ax(f) -> SequentProof:
    return SequentProof(Sequent((f,), (f,)), "ax")


def weaken_to(p: SequentProof, ante: Sequence, succ: Sequence, single: bool) -> SequentProof:
    """Extend ``p`` by WL (and WR or WR') steps so it concludes ``ante => succ``.

    ``ante``/``succ`` must contain the current end-sequent as sub-multisets.
    """
    if len(ante) == len(p.conclusion.ante) and len(succ) == len(p.conclusion.succ):
        if Sequent(ante, succ) == p.conclusion:
            return p
        raise ValueError("target sequent does not extend the proof's end-sequent")
    extra_l = _msub(_ms(ante), _ms(p.conclusion.ante))
    extra_r = _msub(_ms(succ), _ms(p.conclusion.succ))
    if extra_l is None or extra_r is None:
        raise ValueError("target sequent does not extend the proof's end-sequent")
    cur = p
    if extra_r:
        items = list(extra_r.elements())
        if single:
            if len(items) > 1 or cur.conclusion.succ:
                raise ValueError("single-succedent weakening can only fill an empty succedent")
            cur = SequentProof(Sequent(cur.conclusion.ante, (items[0],)), "WR'", (cur,))
        else:
            for f in items:
                cur = SequentProof(Sequent(cur.conclusion.ante, cur.conclusion.succ + (f,)), "WR", (cur,))
    for f in extra_l.elements():
        cur = SequentProof(Sequent(cur.conclusion.ante + (f,), cur.conclusion.succ), "WL", (cur,))
    return cur
