"""Natural-deduction derivations with labeled assumptions.

In the single-conclusion regimes a node concludes one formula or ``Falsum``.
In the multiple-conclusion regime a node concludes a tuple of formulas read
as a multiset, and ``Falsum`` is not used.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .formula import STANDARD, Falsum, Signature, match, parse_formula, render_formula, substitute
from .rulegen import MULTI, NDRuleSchema, RuleSet
from .sequent import OK, Fail, Verdict


@dataclass(frozen=True)
class Assume:
    formula: object
    label: int

    @property
    def conclusion(self):
        return self.formula

    @property
    def children(self) -> tuple:
        return ()


@dataclass(frozen=True)
class Infer:
    rule: str
    conclusion: object
    children: tuple
    discharged: tuple = ()  # one frozenset of labels per child

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        d = tuple(frozenset(x) for x in self.discharged)
        if not d:
            d = tuple(frozenset() for _ in self.children)
        if len(d) != len(self.children):
            raise ValueError("one discharge set per child is required")
        object.__setattr__(self, "discharged", d)


NDDerivation = Assume | Infer


def infer(rule: str, conclusion, children: Sequence = (), discharged: Mapping[int, Sequence[int]] | None = None) -> Infer:
    children = tuple(children)
    d = [frozenset((discharged or {}).get(i, ())) for i in range(len(children))]
    return Infer(rule, conclusion, children, tuple(d))


def nodes(d) -> Iterator[tuple[tuple[int, ...], object]]:
    stack = [((), d)]
    while stack:
        path, node = stack.pop()
        yield path, node
        for i in range(len(node.children) - 1, -1, -1):
            stack.append((path + (i,), node.children[i]))


def _postorder(d) -> list:
    """Distinct nodes, children before parents (shared subtrees once)."""
    order, seen = [], set()
    stack = [(d, False)]
    while stack:
        n, done = stack.pop()
        if done:
            order.append(n)
            continue
        if id(n) in seen:
            continue
        seen.add(id(n))
        stack.append((n, True))
        for c in reversed(n.children):
            stack.append((c, False))
    return order


def _distinct_preorder(d) -> Iterator[tuple[tuple[int, ...], object]]:
    seen: set[int] = set()
    stack = [((), d)]
    while stack:
        path, n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        yield path, n
        for i in range(len(n.children) - 1, -1, -1):
            stack.append((path + (i,), n.children[i]))


def at(d, path: Sequence[int]):
    for i in path:
        d = d.children[i]
    return d


def replace_at(d, path: Sequence[int], new):
    if not path:
        return new
    spine = [d]
    for i in path[:-1]:
        spine.append(spine[-1].children[i])
    cur = new
    for node, i in zip(reversed(spine), reversed(path)):
        kids = list(node.children)
        kids[i] = cur
        cur = Infer(node.rule, node.conclusion, tuple(kids), node.discharged)
    return cur


def size(d) -> int:
    """Node count of the derivation read as a tree (shared parts count per use)."""
    memo: dict[int, int] = {}
    for n in _postorder(d):
        memo[id(n)] = 1 + sum(memo[id(c)] for c in n.children)
    return memo[id(d)]


def leaves(d) -> list[Assume]:
    return [n for _, n in nodes(d) if isinstance(n, Assume)]


def labels(d) -> set[int]:
    out = set()
    for n in _postorder(d):
        if isinstance(n, Assume):
            out.add(n.label)
        else:
            for s in n.discharged:
                out |= s
    return out


def _open_map(d) -> dict:
    """id(node) -> {label: formula} of assumptions open at that node."""
    table: dict[int, dict] = {}
    for n in _postorder(d):
        if isinstance(n, Assume):
            table[id(n)] = {n.label: n.formula}
        else:
            acc: dict = {}
            for c, dis in zip(n.children, n.discharged):
                for lab, f in table[id(c)].items():
                    if lab not in dis:
                        acc[lab] = f
            table[id(n)] = acc
    return table


def open_assumptions(d) -> dict[int, object]:
    """Open assumption classes as ``{label: formula}``."""
    return _open_map(d)[id(d)]


def open_formulas(d) -> Counter:
    return Counter(open_assumptions(d).values())


def conclusion_multiset(c) -> Counter:
    if isinstance(c, tuple):
        return Counter(c)
    if c is Falsum:
        return Counter()
    return Counter([c])


# --------------------------------------------------------------------------
# checking


class NDMismatch(Exception):
    pass


def _pick(schemas, pool: tuple, b: dict):
    if not schemas:
        yield b, []
        return
    for i, f in enumerate(pool):
        if f is None:
            continue
        b2 = match(schemas[0], f, b)
        if b2 is None:
            continue
        rest = pool[:i] + (None,) + pool[i + 1:]
        for b3, used in _pick(schemas[1:], rest, b2):
            yield b3, [i] + used


def _rest(pool: tuple, used: list[int]) -> Counter:
    drop = set(used)
    return Counter(f for i, f in enumerate(pool) if i not in drop)


def match_nd(rule: NDRuleSchema, node: Infer, child_concls: Sequence, child_open: Sequence[dict]) -> dict:
    """Binding under which the node instantiates ``rule``; raises NDMismatch."""
    if len(child_concls) != len(rule.premises):
        raise NDMismatch(f"rule {rule.name} takes {len(rule.premises)} premises, got {len(child_concls)}")
    concl = tuple(conclusion_multiset(node.conclusion).elements())
    kids = [tuple(conclusion_multiset(c).elements()) for c in child_concls]
    first = None

    def premises_from(k: int, b: dict, delta: Counter):
        if k == len(rule.premises):
            yield b
            return
        p = rule.premises[k]
        for b2, used in _pick(p.formulas, kids[k], b):
            rest = _rest(kids[k], used)
            if rest == (delta if p.context else Counter()):
                yield from premises_from(k + 1, b2, delta)

    for b0, used in _pick(rule.conclusion.formulas, concl, {}):
        delta = _rest(concl, used)
        if not rule.conclusion.context and delta:
            first = first or f"conclusion of {rule.name} has unexpected extra formulas"
            continue
        for b in premises_from(0, b0, delta):
            err = _check_discharge(rule, node, b, child_open)
            if err is None:
                return b
            first = first or err
    raise NDMismatch(first or f"node does not instantiate rule {rule.name}")


def _check_discharge(rule: NDRuleSchema, node: Infer, b: dict, child_open: Sequence[dict]) -> str | None:
    for k, (p, dis) in enumerate(zip(rule.premises, node.discharged)):
        if not dis:
            continue
        try:
            allowed = {substitute(s, b) for s in p.discharge}
        except Exception:
            return f"rule {rule.name}: discharge schema not determined by the premises"
        for lab in dis:
            if lab not in child_open[k]:
                return f"label {lab} is not an open assumption of premise {k}"
            if child_open[k][lab] not in allowed:
                return f"label {lab} cannot be discharged at premise {k} of {rule.name}"
    return None


def check_derivation(d, rs: RuleSet) -> Verdict:
    multi = rs.regime == MULTI
    rules = {r.name: r for r in rs.nd_rules}
    label_formula: dict[int, object] = {}
    for path, n in _distinct_preorder(d):
        if isinstance(n, Assume):
            if n.formula is Falsum:
                return Fail(path, "falsum cannot be assumed")
            seen = label_formula.setdefault(n.label, n.formula)
            if seen != n.formula:
                return Fail(path, f"label {n.label} is used for two different formulas")
        else:
            c = n.conclusion
            if multi and not isinstance(c, tuple):
                return Fail(path, "conclusions are formula tuples in the multiple-conclusion regime")
            if not multi and isinstance(c, tuple):
                return Fail(path, "conclusion must be a single formula or falsum")
            if n.rule not in rules:
                return Fail(path, f"unknown rule {n.rule!r} in {rs.name}")
    open_at = _open_map(d)
    for path, n in _distinct_preorder(d):
        if isinstance(n, Assume):
            continue
        rule = rules[n.rule]
        kids = [(c.conclusion if not (multi and isinstance(c, Assume)) else (c.formula,)) for c in n.children]
        try:
            match_nd(rule, n, kids, [open_at[id(c)] for c in n.children])
        except NDMismatch as e:
            return Fail(path, f"mismatch: {e}")
    return OK


# --------------------------------------------------------------------------
# grafting


class _Fresh:
    def __init__(self, start: int):
        self.n = start

    def __call__(self) -> int:
        self.n += 1
        return self.n


def relabel(d, mapping: Mapping[int, int]):
    """Rename labels everywhere (leaves and discharge sets)."""
    built: dict[int, object] = {}
    for n in _postorder(d):
        if isinstance(n, Assume):
            built[id(n)] = Assume(n.formula, mapping.get(n.label, n.label))
        else:
            built[id(n)] = Infer(n.rule, n.conclusion, tuple(built[id(c)] for c in n.children),
                                 tuple(frozenset(mapping.get(l, l) for l in s) for s in n.discharged))
    return built[id(d)]


def graft(target, formula, source, fresh: _Fresh | None = None):
    """Replace each open leaf of ``target`` assuming ``formula`` by a copy of
    ``source``.  Open labels of ``source`` are renamed once (so all copies
    share them); its internally discharged labels are renamed per copy."""
    fresh = fresh or _Fresh(max(labels(target) | labels(source) | {0}))
    src_open = set(open_assumptions(source))
    src_inner = labels(source) - src_open
    open_map = {lab: fresh() for lab in sorted(src_open)}

    def copy():
        m = dict(open_map)
        m.update({lab: fresh() for lab in sorted(src_inner)})
        return relabel(source, m)

    # walk target, tracking labels discharged on the path
    hit = False
    stack = [(target, frozenset(), False)]
    order = []
    while stack:
        n, closed, done = stack.pop()
        if isinstance(n, Assume):
            order.append((n, closed))
            continue
        if done:
            order.append((n, closed))
            continue
        stack.append((n, closed, True))
        for c, dis in zip(reversed(n.children), reversed(n.discharged)):
            stack.append((c, closed | dis, False))
    results: dict[tuple[int, frozenset], object] = {}
    for n, closed in order:
        if isinstance(n, Assume):
            if n.formula == formula and n.label not in closed:
                results[(id(n), closed)] = copy()
                hit = True
            else:
                results[(id(n), closed)] = n
        else:
            kids = tuple(results[(id(c), closed | dis)] for c, dis in zip(n.children, n.discharged))
            results[(id(n), closed)] = Infer(n.rule, n.conclusion, kids, n.discharged)
    if not hit:
        return target
    return results[(id(target), frozenset())]


def graft_labels(target, sources: Mapping[int, object], fresh: _Fresh):
    """Replace each open leaf of ``target`` whose label is a key of
    ``sources`` by a copy of the mapped derivation.  Open labels of the
    sources are kept; labels they discharge internally are renamed per copy."""
    inner = {lab: sorted(labels(src) - set(open_assumptions(src))) for lab, src in sources.items()}

    def copy(lab):
        if not inner[lab]:
            return sources[lab]
        return relabel(sources[lab], {x: fresh() for x in inner[lab]})

    results: dict[tuple[int, frozenset], object] = {}
    stack = [(target, frozenset(), False)]
    while stack:
        n, closed, done = stack.pop()
        if isinstance(n, Assume):
            hit = n.label in sources and n.label not in closed
            results[(id(n), closed)] = copy(n.label) if hit else n
        elif done:
            kids = tuple(results[(id(c), closed | dis)] for c, dis in zip(n.children, n.discharged))
            results[(id(n), closed)] = Infer(n.rule, n.conclusion, kids, n.discharged)
        else:
            stack.append((n, closed, True))
            for c, dis in zip(reversed(n.children), reversed(n.discharged)):
                stack.append((c, closed | dis, False))
    return results[(id(target), frozenset())]


# --------------------------------------------------------------------------
# I/O


def _fmt_concl(c, sig):
    if isinstance(c, tuple):
        return [render_formula(f, sig) for f in c]
    return render_formula(c, sig)


def _parse_concl(x, sig):
    if isinstance(x, list):
        return tuple(parse_formula(s, sig) for s in x)
    return parse_formula(x, sig)


def derivation_to_json(d, sig: Signature = STANDARD) -> dict:
    built: dict[int, dict] = {}
    for n in _postorder(d):
        if isinstance(n, Assume):
            built[id(n)] = {"assume": render_formula(n.formula, sig), "label": n.label}
        else:
            out = {"rule": n.rule, "conclusion": _fmt_concl(n.conclusion, sig),
                   "children": [built[id(c)] for c in n.children]}
            dis = {str(i): sorted(s) for i, s in enumerate(n.discharged) if s}
            if dis:
                out["discharged"] = dis
            built[id(n)] = out
    return built[id(d)]


def derivation_from_json(data: dict, sig: Signature = STANDARD):
    built: dict[int, object] = {}
    order, stack = [], [data]
    while stack:
        n = stack.pop()
        order.append(n)
        stack.extend(n.get("children", []))
    for n in reversed(order):
        if "assume" in n:
            built[id(n)] = Assume(parse_formula(n["assume"], sig), int(n["label"]))
        else:
            kids = tuple(built[id(c)] for c in n.get("children", []))
            dis = n.get("discharged", {})
            sets = tuple(frozenset(int(x) for x in dis.get(str(i), ())) for i in range(len(kids)))
            built[id(n)] = Infer(n["rule"], _parse_concl(n["conclusion"], sig), kids, sets)
    return built[id(data)]


def render_derivation(d, sig: Signature = STANDARD) -> str:
    lines = []
    stack = [(d, 0, ())]
    while stack:
        n, depth, dis = stack.pop()
        pad = "  " * depth
        if isinstance(n, Assume):
            lines.append(f"{pad}[{render_formula(n.formula, sig)}]^{n.label}")
        else:
            c = n.conclusion
            text = ", ".join(render_formula(f, sig) for f in c) if isinstance(c, tuple) else render_formula(c, sig)
            closed = sorted(set().union(*n.discharged)) if n.discharged else []
            tag = f"{n.rule}" + (f": {','.join(map(str, closed))}" if closed else "")
            lines.append(f"{pad}{text}    [{tag}]")
            for c in reversed(n.children):
                stack.append((c, depth + 1, ()))
    return "\n".join(lines)
