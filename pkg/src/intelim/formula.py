"""Propositional formulas over declared connective signatures.

Formulas are immutable and hashable.  Schema formulas are ordinary formulas
that may additionally contain metavariable leaves (:class:`Meta`); the same
classes serve both roles.

Grammar::

    formula := IDENT | "?" IDENT | "_|_" | UNSYM formula
             | "(" formula BINSYM formula ")" | NSYM "(" formula {"," formula} ")"

Binary compounds need parentheses except at top level, so ``p | q`` parses
but ``p | q | r`` is rejected as ambiguous.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
FALSUM_TOKEN = "_|_"


class ParseError(ValueError):
    """Syntax error with the offending character position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.message = message
        self.pos = pos


class SchemaError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    _hash: int = field(init=False, repr=False, compare=False)
    _key: str = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("var", self.name)))
        object.__setattr__(self, "_key", "0" + self.name)

    def __hash__(self):
        return self._hash

    def __str__(self):
        return render_formula(self)


@dataclass(frozen=True, slots=True)
class Meta:
    name: str
    _hash: int = field(init=False, repr=False, compare=False)
    _key: str = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("meta", self.name)))
        object.__setattr__(self, "_key", "?" + self.name)

    def __hash__(self):
        return self._hash

    def __str__(self):
        return render_formula(self)


class _Falsum:
    """The falsum constant; a single shared instance."""

    __slots__ = ()
    _hash = hash("falsum")
    _key = "!"

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, _Falsum)

    def __repr__(self):
        return "Falsum"

    def __str__(self):
        return FALSUM_TOKEN

    def __reduce__(self):
        return "Falsum"


Falsum = _Falsum()


@dataclass(frozen=True, slots=True)
class Comp:
    conn: str
    args: tuple
    _hash: int = field(init=False, repr=False, compare=False)
    _key: str = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "_hash", hash((self.conn, self.args)))
        key = "1" + self.conn + "(" + ",".join(a._key for a in self.args) + ")"
        object.__setattr__(self, "_key", key)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Comp) or self._hash != other._hash:
            return False
        return self.conn == other.conn and self.args == other.args

    def __str__(self):
        return render_formula(self)


Formula = Var | _Falsum | Comp
SchemaFormula = Var | _Falsum | Comp | Meta
Binding = Mapping[str, "Formula"]


def fkey(f) -> str:
    """Total-order key used for canonical multiset ordering."""
    return f._key


# --------------------------------------------------------------------------
# signatures


@dataclass(frozen=True)
class Connective:
    name: str
    symbol: str
    arity: int


@dataclass(frozen=True)
class Signature:
    connectives: tuple[Connective, ...]

    def __post_init__(self):
        object.__setattr__(self, "connectives", tuple(self.connectives))
        names, symbols = set(), set()
        for c in self.connectives:
            if c.arity < 1:
                raise ValueError(f"connective {c.name!r}: arity must be >= 1")
            if not c.symbol or any(ch in c.symbol for ch in "(),?") or any(ch.isspace() for ch in c.symbol):
                raise ValueError(f"connective {c.name!r}: bad symbol {c.symbol!r}")
            if c.symbol[0].isalnum() or c.symbol[0] == "_":
                raise ValueError(f"connective {c.name!r}: symbol must not start like an identifier")
            if c.name in names or c.symbol in symbols:
                raise ValueError(f"duplicate connective {c.name!r} / {c.symbol!r}")
            names.add(c.name)
            symbols.add(c.symbol)

    def by_name(self, name: str) -> Connective:
        for c in self.connectives:
            if c.name == name:
                return c
        raise KeyError(f"connective {name!r} not in signature")

    def by_symbol(self, symbol: str) -> Connective:
        for c in self.connectives:
            if c.symbol == symbol:
                return c
        raise KeyError(f"symbol {symbol!r} not in signature")

    def names(self) -> set[str]:
        return {c.name for c in self.connectives}

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.connectives)

    def union(self, other: "Signature") -> "Signature":
        merged = list(self.connectives)
        for c in other.connectives:
            if c in merged:
                continue
            merged.append(c)
        return Signature(tuple(merged))

    def restrict(self, names: Iterable[str]) -> "Signature":
        wanted = set(names)
        return Signature(tuple(c for c in self.connectives if c.name in wanted))

    def to_json(self) -> list[dict]:
        return [{"name": c.name, "symbol": c.symbol, "arity": c.arity} for c in self.connectives]

    @classmethod
    def from_json(cls, data: list[dict]) -> "Signature":
        return cls(tuple(Connective(d["name"], d["symbol"], int(d["arity"])) for d in data))


NAND = Connective("nand", "|", 2)
HP = Connective("hp", "||", 2)
NOR = Connective("nor", "!", 2)
XOR = Connective("xor", "^", 2)
NOT = Connective("not", "~", 1)
AND = Connective("and", "&", 2)
OR = Connective("or", "+", 2)
IMP = Connective("imp", "->", 2)

STANDARD = Signature((NAND, HP, NOR, XOR, NOT, AND, OR, IMP))


def load_signature(path) -> Signature:
    with open(path) as fh:
        return Signature.from_json(json.load(fh))


# --------------------------------------------------------------------------
# construction helpers


def var(name: str) -> Var:
    return Var(name)


def meta(name: str) -> Meta:
    return Meta(name)


def comp(conn: str, *args) -> Comp:
    return Comp(conn, tuple(args))


def nand(a, b) -> Comp:
    return Comp("nand", (a, b))


def neg(a, sig: Signature | None = None) -> Comp:
    """Negation: primitive ``~`` if the signature has it, else ``A | A``."""
    if sig is not None and "not" in sig and "nand" not in sig:
        return Comp("not", (a,))
    return Comp("nand", (a, a))


# --------------------------------------------------------------------------
# parsing


def _tokenize(text: str, sig: Signature, allow_meta: bool):
    symbols = sorted((c.symbol for c in sig.connectives), key=len, reverse=True)
    pos, n = 0, len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if text.startswith(FALSUM_TOKEN, pos):
            yield ("falsum", FALSUM_TOKEN, pos)
            pos += len(FALSUM_TOKEN)
            continue
        if ch in "(),":
            yield (ch, ch, pos)
            pos += 1
            continue
        if ch == "?":
            m = IDENT.match(text, pos + 1)
            if not m:
                raise ParseError("metavariable name expected after '?'", pos)
            if not allow_meta:
                raise ParseError("metavariables are only allowed in schemas", pos)
            yield ("meta", m.group(), pos)
            pos = m.end()
            continue
        m = IDENT.match(text, pos)
        if m:
            yield ("ident", m.group(), pos)
            pos = m.end()
            continue
        for s in symbols:
            if text.startswith(s, pos):
                yield ("sym", s, pos)
                pos += len(s)
                break
        else:
            raise ParseError(f"unknown symbol {ch!r}", pos)
    yield ("eof", "", n)


class _Parser:
    def __init__(self, text: str, sig: Signature, allow_meta: bool):
        self.sig = sig
        self.tokens = list(_tokenize(text, sig, allow_meta))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.take()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def top(self):
        left = self.operand()
        result = self.maybe_binary(left)
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return result

    def maybe_binary(self, left):
        tok = self.peek()
        if tok[0] != "sym":
            return left
        conn = self.sig.by_symbol(tok[1])
        if conn.arity != 2:
            raise ParseError(f"arity mismatch: {tok[1]!r} is not a binary connective", tok[2])
        self.take()
        right = self.operand()
        nxt = self.peek()
        if nxt[0] == "sym":
            raise ParseError("ambiguous: parentheses required around binary compounds", nxt[2])
        return Comp(conn.name, (left, right))

    def operand(self):
        tok = self.take()
        kind, text, pos = tok
        if kind == "ident":
            return Var(text)
        if kind == "meta":
            return Meta(text)
        if kind == "falsum":
            return Falsum
        if kind == "(":
            inner = self.operand()
            inner = self.maybe_binary(inner)
            self.expect(")")
            return inner
        if kind == "sym":
            conn = self.sig.by_symbol(text)
            if conn.arity == 1:
                return Comp(conn.name, (self.operand(),))
            if conn.arity == 2:
                raise ParseError(f"arity mismatch: binary {text!r} used as prefix", pos)
            self.expect("(")
            args = [self.full()]
            while self.peek()[0] == ",":
                self.take()
                args.append(self.full())
            close = self.expect(")")
            if len(args) != conn.arity:
                raise ParseError(
                    f"arity mismatch: {text!r} takes {conn.arity} arguments, got {len(args)}", close[2])
            return Comp(conn.name, tuple(args))
        if kind == "eof":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {text!r}", pos)

    def full(self):
        return self.maybe_binary(self.operand())


def parse_formula(text: str, sig: Signature = STANDARD):
    """Parse a formula; raises :class:`ParseError` on malformed input."""
    return _Parser(text, sig, allow_meta=False).top()


def parse_schema(text: str, sig: Signature = STANDARD):
    """Parse a schema formula, where ``?A`` denotes a metavariable."""
    return _Parser(text, sig, allow_meta=True).top()


# --------------------------------------------------------------------------
# rendering


def render_formula(f, sig: Signature = STANDARD) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Meta):
        return "?" + f.name
    if f is Falsum or isinstance(f, _Falsum):
        return FALSUM_TOKEN
    try:
        conn = sig.by_name(f.conn)
    except KeyError:
        conn = STANDARD.by_name(f.conn)
    if conn.arity == 1:
        return conn.symbol + render_formula(f.args[0], sig)
    if conn.arity == 2:
        return "(" + render_formula(f.args[0], sig) + " " + conn.symbol + " " + render_formula(f.args[1], sig) + ")"
    return conn.symbol + "(" + ", ".join(render_formula(a, sig) for a in f.args) + ")"


# --------------------------------------------------------------------------
# structure


def substitute(s, b: Binding):
    """Replace metavariables of ``s`` by their bindings."""
    if isinstance(s, Meta):
        try:
            return b[s.name]
        except KeyError:
            raise SchemaError(f"unbound metavariable ?{s.name}") from None
    if isinstance(s, Comp):
        return Comp(s.conn, tuple(substitute(a, b) for a in s.args))
    return s


def match(schema, f, binding: dict | None = None) -> dict | None:
    """Extend ``binding`` so that ``substitute(schema, binding) == f``.

    Returns the extended binding (a new dict) or ``None``.
    """
    out = dict(binding) if binding else {}
    return out if _match(schema, f, out) else None


def _match(schema, f, b: dict) -> bool:
    if isinstance(schema, Meta):
        bound = b.get(schema.name)
        if bound is None:
            b[schema.name] = f
            return True
        return bound == f
    if isinstance(schema, Comp):
        if not isinstance(f, Comp) or f.conn != schema.conn or len(f.args) != len(schema.args):
            return False
        return all(_match(s, g, b) for s, g in zip(schema.args, f.args))
    return schema == f


def metavariables(s) -> set[str]:
    if isinstance(s, Meta):
        return {s.name}
    if isinstance(s, Comp):
        out: set[str] = set()
        for a in s.args:
            out |= metavariables(a)
        return out
    return set()


def variables(f) -> set[str]:
    if isinstance(f, Var):
        return {f.name}
    if isinstance(f, Comp):
        out: set[str] = set()
        for a in f.args:
            out |= variables(a)
        return out
    return set()


def connectives(f) -> set[str]:
    if isinstance(f, Comp):
        out = {f.conn}
        for a in f.args:
            out |= connectives(a)
        return out
    return set()


def size(f) -> int:
    """Number of connective occurrences."""
    if isinstance(f, Comp):
        return 1 + sum(size(a) for a in f.args)
    return 0


def subformulas(f) -> Iterator:
    yield f
    if isinstance(f, Comp):
        for a in f.args:
            yield from subformulas(a)


def is_atomic(f) -> bool:
    return isinstance(f, Var)


def check_well_formed(f, sig: Signature) -> None:
    if isinstance(f, Var):
        if not IDENT.fullmatch(f.name):
            raise ValueError(f"bad variable name {f.name!r}")
    elif isinstance(f, Comp):
        conn = sig.by_name(f.conn)
        if conn.arity != len(f.args):
            raise ValueError(f"{f.conn} expects {conn.arity} arguments")
        for a in f.args:
            check_well_formed(a, sig)
