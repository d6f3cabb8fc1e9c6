"""Agents, chains of belief for awareness, the formula AST and its concrete syntax.

Surface grammar, loosest binding first::

    formula := impl ('<->' formula)?
    impl    := disj ('->' impl)?
    disj    := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | OP '[' chain ']' unary | '(' formula ')' | ATOM
    OP      := 'A' | 'E' | 'K' | 'I' | 'X' | 'C'

``K`` is read as ``E``. ``X[θ]`` is the indistinguishability box and ``I`` takes
exactly one agent.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import ParseError, WellFormednessError

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def check_name(name: str, what: str = "agent") -> str:
    if not isinstance(name, str) or not _NAME.match(name):
        raise ValueError(f"invalid {what} name: {name!r}")
    return name


@dataclass(frozen=True)
class Chain:
    """Non-empty sequence of agents ``(i1, ..., in)``."""

    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("a chain needs at least one agent")
        for m in members:
            check_name(m)
        object.__setattr__(self, "members", members)

    @classmethod
    def parse(cls, text: str) -> "Chain":
        """Read ``"a,b,a"`` (brackets optional)."""
        text = text.strip()
        if text.startswith("[") and text.endswith("]"):
            text = text[1:-1]
        return cls(tuple(part.strip() for part in text.split(",")))

    @property
    def last(self) -> str:
        return self.members[-1]

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __str__(self):
        return ",".join(self.members)

    def __repr__(self):
        return f"Chain({str(self)!r})"


def as_chain(value) -> Chain:
    if isinstance(value, Chain):
        return value
    if isinstance(value, str):
        return Chain.parse(value)
    return Chain(tuple(value))


def canon(theta: Chain) -> Chain:
    """Collapse every run of adjacent equal agents to one occurrence."""
    out = []
    for agent in theta.members:
        if not out or out[-1] != agent:
            out.append(agent)
    if len(out) == len(theta.members):
        return theta
    return Chain(tuple(out))


def chain_leq(theta: Chain, other: Chain) -> bool:
    """theta ⪯ other: canon(theta) is a prefix of canon(other)."""
    a, b = canon(theta).members, canon(other).members
    return len(a) <= len(b) and b[: len(a)] == a


def chain_equiv(theta: Chain, other: Chain) -> bool:
    return canon(theta) == canon(other)


def chain_sort_key(theta: Chain):
    c = canon(theta)
    return (len(c), str(c))


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------


class Formula:
    __slots__ = ()

    def __post_init__(self):
        # Trees are used heavily as dict keys; cache the structural hash.
        key = (type(self).__name__,) + tuple(getattr(self, f) for f in self._fields)
        object.__setattr__(self, "_hash", hash(key))

    def __str__(self):
        return to_text(self)


def _hashed(cls):
    cls.__hash__ = lambda self: self._hash
    return cls


@_hashed
@dataclass(frozen=True, eq=True, repr=True)
class Atom(Formula):
    name: str
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    _fields = ("name",)


@_hashed
@dataclass(frozen=True)
class Not(Formula):
    sub: Formula
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    _fields = ("sub",)


@_hashed
@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    _fields = ("left", "right")


@_hashed
@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    _fields = ("left", "right")


@_hashed
@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    _fields = ("left", "right")


@_hashed
@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    _fields = ("left", "right")


@_hashed
@dataclass(frozen=True)
class Aware(Formula):
    chain: Chain
    sub: Formula
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    _fields = ("chain", "sub")


@_hashed
@dataclass(frozen=True)
class ImplicitK(Formula):
    agent: str
    sub: Formula
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    _fields = ("agent", "sub")


@_hashed
@dataclass(frozen=True)
class BoxIndist(Formula):
    chain: Chain
    sub: Formula
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    _fields = ("chain", "sub")


@_hashed
@dataclass(frozen=True)
class CKnow(Formula):
    chain: Chain
    sub: Formula
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    _fields = ("chain", "sub")


@_hashed
@dataclass(frozen=True)
class ExplicitK(Formula):
    chain: Chain
    sub: Formula
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    _fields = ("chain", "sub")


BINARY = (And, Or, Implies, Iff)
CHAIN_OPS = (Aware, BoxIndist, CKnow, ExplicitK)
MODAL = CHAIN_OPS + (ImplicitK,)
UNARY = MODAL + (Not,)

_KEYWORD = {"A": Aware, "E": ExplicitK, "K": ExplicitK, "X": BoxIndist, "C": CKnow}
_OP_TEXT = {Aware: "A", ExplicitK: "E", BoxIndist: "X", CKnow: "C"}
_BIN_TEXT = {And: "&", Or: "|", Implies: "->", Iff: "<->"}

FormulaLike = Union[Formula, str]


def as_formula(value: FormulaLike) -> Formula:
    return parse(value) if isinstance(value, str) else value


def conj(*parts: Formula) -> Formula:
    """Right-associated conjunction of one or more formulas."""
    if not parts:
        raise ValueError("empty conjunction")
    out = parts[-1]
    for f in reversed(parts[:-1]):
        out = And(f, out)
    return out


def children(phi: Formula) -> tuple:
    if isinstance(phi, Atom):
        return ()
    if isinstance(phi, BINARY):
        return (phi.left, phi.right)
    return (phi.sub,)


def rebuild(phi: Formula, kids) -> Formula:
    """Same node kind and index as `phi`, with new children."""
    if isinstance(phi, Atom):
        return phi
    if isinstance(phi, BINARY):
        return type(phi)(kids[0], kids[1])
    if isinstance(phi, Not):
        return Not(kids[0])
    if isinstance(phi, ImplicitK):
        return ImplicitK(phi.agent, kids[0])
    return type(phi)(phi.chain, kids[0])


def walk(phi: Formula) -> Iterator[Formula]:
    """Pre-order traversal of every node."""
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def node_count(phi: Formula) -> int:
    return sum(1 for _ in walk(phi))


def modal_depth(phi: Formula) -> int:
    if isinstance(phi, Atom):
        return 0
    inner = max(modal_depth(c) for c in children(phi))
    return inner + 1 if isinstance(phi, MODAL) else inner


def atoms_of(phi: Formula) -> frozenset:
    return frozenset(n.name for n in walk(phi) if isinstance(n, Atom))


def subformulas(phi: Formula) -> frozenset:
    return frozenset(walk(phi))


def chains_of(phi: Formula) -> frozenset:
    return frozenset(n.chain for n in walk(phi) if isinstance(n, CHAIN_OPS))


def agents_of(phi: Formula) -> frozenset:
    out = set()
    for n in walk(phi):
        if isinstance(n, ImplicitK):
            out.add(n.agent)
        elif isinstance(n, CHAIN_OPS):
            out.update(n.chain.members)
    return frozenset(out)


def canon_formula(phi: Formula) -> Formula:
    """Replace every chain by its canonical form."""
    if isinstance(phi, Atom):
        return phi
    kids = [canon_formula(c) for c in children(phi)]
    if isinstance(phi, CHAIN_OPS):
        return type(phi)(canon(phi.chain), kids[0])
    return rebuild(phi, kids)


# --------------------------------------------------------------------------
# well-formedness
# --------------------------------------------------------------------------


def ill_formed_pair(phi: Formula):
    """First (outer, inner) chain pair breaking the nesting rule, or None."""

    def visit(node, scopes):
        if isinstance(node, (Aware, ExplicitK)):
            for outer in scopes:
                if not chain_leq(outer, node.chain):
                    return outer, node.chain
            scopes = scopes + (node.chain,)
        for c in children(node):
            bad = visit(c, scopes)
            if bad:
                return bad
        return None

    return visit(phi, ())


def well_formed(phi: Formula) -> bool:
    return ill_formed_pair(phi) is None


def check_well_formed(phi: Formula) -> Formula:
    bad = ill_formed_pair(phi)
    if bad:
        raise WellFormednessError(*bad)
    return phi


# --------------------------------------------------------------------------
# printing
# --------------------------------------------------------------------------

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}


def _prec(phi):
    if isinstance(phi, Atom):
        return 6
    return _PREC.get(type(phi), 5)


def to_text(phi: Formula) -> str:
    """Render with the fewest parentheses that still parse back to `phi`."""
    if isinstance(phi, Atom):
        return phi.name
    if isinstance(phi, BINARY):
        p = _PREC[type(phi)]
        right_assoc = isinstance(phi, (Implies, Iff))
        left, right = to_text(phi.left), to_text(phi.right)
        lp, rp = _prec(phi.left), _prec(phi.right)
        if lp < p or (right_assoc and lp == p):
            left = f"({left})"
        if rp < p or (not right_assoc and rp == p):
            right = f"({right})"
        return f"{left} {_BIN_TEXT[type(phi)]} {right}"
    inner = to_text(phi.sub)
    if _prec(phi.sub) < 5:
        inner = f"({inner})"
    if isinstance(phi, Not):
        return "!" + inner
    if isinstance(phi, ImplicitK):
        return f"I[{phi.agent}] {inner}"
    return f"{_OP_TEXT[type(phi)]}[{phi.chain}] {inner}"


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(<->|->|[!&|()\[\],])|([A-Za-z_][A-Za-z0-9_]*))")


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []  # (kind, value, offset)
        pos = 0
        n = len(text)
        while True:
            m = _TOKEN.match(text, pos)
            if m is None:
                skip = len(text[pos:]) - len(text[pos:].lstrip())
                pos += skip
                if pos >= n:
                    break
                raise ParseError(f"unexpected character {text[pos]!r}", *self.position(pos))
            if m.group(1):
                self.tokens.append((m.group(1), m.group(1), m.start(1)))
            else:
                self.tokens.append(("ident", m.group(2), m.start(2)))
            pos = m.end()
        self.tokens.append(("end", "", n))

    def position(self, offset):
        line = self.text.count("\n", 0, offset) + 1
        col = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return line, col


class _Parser:
    def __init__(self, text):
        self.lex = _Lexer(text)
        self.tokens = self.lex.tokens
        self.i = 0

    def peek(self, ahead=0):
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def fail(self, expected):
        kind, value, offset = self.peek()
        what = "end of input" if kind == "end" else repr(value)
        raise ParseError(f"unexpected {what}", *self.lex.position(offset), expected=expected)

    def expect(self, kind):
        if self.peek()[0] != kind:
            self.fail([kind])
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def formula(self):
        left = self.impl()
        if self.peek()[0] == "<->":
            self.i += 1
            return Iff(left, self.formula())
        return left

    def impl(self):
        left = self.disj()
        if self.peek()[0] == "->":
            self.i += 1
            return Implies(left, self.impl())
        return left

    def disj(self):
        out = self.conj()
        while self.peek()[0] == "|":
            self.i += 1
            out = Or(out, self.conj())
        return out

    def conj(self):
        out = self.unary()
        while self.peek()[0] == "&":
            self.i += 1
            out = And(out, self.unary())
        return out

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "!":
            self.i += 1
            return Not(self.unary())
        if kind == "(":
            self.i += 1
            inner = self.formula()
            self.expect(")")
            return inner
        if kind == "ident":
            if self.peek(1)[0] == "[" and value in ("A", "E", "K", "X", "C", "I"):
                self.i += 2
                members = self.chain_members()
                if value == "I":
                    if len(members) != 1:
                        _, _, offset = self.tokens[self.i - 1]
                        raise ParseError("I[...] takes exactly one agent", *self.lex.position(offset), expected=["]"])
                    return ImplicitK(members[0], self.unary())
                return _KEYWORD[value](Chain(tuple(members)), self.unary())
            self.i += 1
            return Atom(value)
        self.fail(["!", "(", "ident"])

    def chain_members(self):
        members = [self.expect("ident")[1]]
        while self.peek()[0] == ",":
            self.i += 1
            members.append(self.expect("ident")[1])
        self.expect("]")
        return members

    def parse(self):
        phi = self.formula()
        if self.peek()[0] != "end":
            self.fail(["&", "|", "->", "<->", "end"])
        return phi


def parse(text: str) -> Formula:
    """Parse surface syntax. The nesting restriction is not checked here."""
    return _Parser(text).parse()
