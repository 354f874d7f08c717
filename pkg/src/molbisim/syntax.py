"""Typed formulas over a connective set: AST, parser, printer, enumeration."""

from __future__ import annotations

import itertools
import re
from typing import Iterator, Sequence

from .skeletons import (
    BOOL_SYMBOL,
    ConnectiveSet,
    IdLeaf,
    LetterLeaf,
    Vertex,
)


class FormulaError(ValueError):
    """Parse, typing or negation error."""


class Formula:
    """Base class; subclasses are immutable and hash structurally."""

    __slots__ = ("_key", "_hash", "type", "depth")

    def _init(self, key, type_, depth):
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))
        object.__setattr__(self, "type", type_)
        object.__setattr__(self, "depth", depth)

    def __setattr__(self, name, value):
        raise AttributeError("formulas are immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Formula) or self._hash != other._hash:
            return False
        return self._key == other._key

    def __repr__(self):
        return f"{type(self).__name__}({pretty(self)!r})"

    def __str__(self):
        return pretty(self)


class Letter(Formula):
    __slots__ = ("name", "negated")

    def __init__(self, name: str, type: int = 1, negated: bool = False):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "negated", bool(negated))
        self._init(("L", name, bool(negated)), type, 0)


class Apply(Formula):
    __slots__ = ("conn", "args", "negated")

    def __init__(self, conn: str, args: Sequence[Formula], type: int = 1, negated: bool = False):
        args = tuple(args)
        object.__setattr__(self, "conn", conn)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "negated", bool(negated))
        depth = 1 + max((a.depth for a in args), default=0)
        self._init(("A", conn, bool(negated), args), type, depth)


class BoolOp(Formula):
    __slots__ = ("kind", "left", "right")

    def __init__(self, kind: str, left: Formula, right: Formula):
        if kind not in BOOL_SYMBOL:
            raise FormulaError(f"unknown Boolean connective {kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        self._init(("B", kind, left, right), left.type, 1 + max(left.depth, right.depth))


# --------------------------------------------------------------------------
# printing

def pretty(phi: Formula) -> str:
    if isinstance(phi, Letter):
        return ("-" if phi.negated else "") + phi.name
    if isinstance(phi, Apply):
        return ("-" if phi.negated else "") + phi.conn + "(" + ", ".join(pretty(a) for a in phi.args) + ")"
    return f"({pretty(phi.left)} {BOOL_SYMBOL[phi.kind]} {pretty(phi.right)})"


# --------------------------------------------------------------------------
# construction helpers

def letter(C: ConnectiveSet, name: str) -> Letter:
    if name not in C.letters:
        raise FormulaError(f"unknown letter {name!r}")
    return Letter(name, C.letters[name].output_type)


def apply(C: ConnectiveSet, conn: str, *args: Formula, negated: bool = False,
          allow_components: bool = False) -> Apply:
    """Type-checked application of a primitive (or component) connective."""
    if conn in C.moleculars:
        mc = C.moleculars[conn]
        inputs, out = mc.input_types, mc.output_type
    elif conn in C.atomics and (allow_components or conn not in C.components):
        s = C.atomics[conn]
        inputs, out = s.input_types, s.output_type
    elif conn in C.letters:
        raise FormulaError(f"{conn} is a propositional letter and takes no arguments")
    else:
        raise FormulaError(f"unknown connective {conn!r}")
    if len(args) != len(inputs):
        raise FormulaError(f"{conn} expects {len(inputs)} argument(s), got {len(args)}")
    for j, (a, k) in enumerate(zip(args, inputs), start=1):
        if a.type != k:
            raise FormulaError(f"argument {j} of {conn} has type {a.type}, expected type {k}")
    return Apply(conn, args, out, negated)


def boolop(C: ConnectiveSet, kind: str, left: Formula, right: Formula) -> BoolOp:
    if left.type != right.type:
        raise FormulaError(f"operands of {BOOL_SYMBOL[kind]} have types {left.type} and {right.type}")
    if (kind, left.type) not in C.booleans:
        raise FormulaError(f"Boolean {kind} of type {left.type} is not part of this logic")
    return BoolOp(kind, left, right)


def negate(phi: Formula) -> Formula:
    """Boolean negation of the outermost connective (an involution)."""
    if isinstance(phi, Letter):
        return Letter(phi.name, phi.type, not phi.negated)
    if isinstance(phi, Apply):
        return Apply(phi.conn, phi.args, phi.type, not phi.negated)
    raise FormulaError(
        f"Boolean negation is only defined for connectives and letters, not for {BOOL_SYMBOL[phi.kind]}")


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_']*)|(.))")


def _tokens(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # pragma: no cover - the pattern always matches
            break
        tok = m.group(1) or m.group(2)
        out.append((tok, m.start(1) if m.group(1) else m.start(2)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text, C, allow_components):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0
        self.C = C
        self.allow_components = allow_components

    def error(self, msg):
        pos = self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)
        raise FormulaError(f"{msg} at column {pos + 1} in {self.text!r}")

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            self.error(f"expected {expected or 'a formula'} but input ended")
        if expected is not None and tok != expected:
            self.error(f"expected {expected!r}, got {tok!r}")
        self.i += 1
        return tok

    def formula(self):
        tok = self.peek()
        if tok == "-":
            self.take("-")
            inner = self.formula()
            try:
                return negate(inner)
            except FormulaError as e:
                self.error(str(e))
        if tok == "(":
            self.take("(")
            left = self.formula()
            op = self.take()
            kind = {"&": "and", "|": "or"}.get(op)
            if kind is None:
                self.error(f"expected '&' or '|', got {op!r}")
            right = self.formula()
            self.take(")")
            try:
                return boolop(self.C, kind, left, right)
            except FormulaError as e:
                self.error(str(e))
        if tok is None or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok):
            self.error(f"unexpected token {tok!r}" if tok else "empty formula")
        name = self.take()
        if self.peek() == "(":
            self.take("(")
            args = [self.formula()]
            while self.peek() == ",":
                self.take(",")
                args.append(self.formula())
            self.take(")")
            try:
                return apply(self.C, name, *args, allow_components=self.allow_components)
            except FormulaError as e:
                self.error(str(e))
        if name in self.C.letters:
            return letter(self.C, name)
        if name in self.C.atomics or name in self.C.moleculars:
            self.error(f"connective {name} needs arguments")
        self.error(f"unknown name {name!r}")

    def parse(self):
        phi = self.formula()
        if self.peek() is not None:
            self.error(f"unexpected trailing {self.peek()!r}")
        return phi


def parse(text: str, C: ConnectiveSet, allow_components: bool = False) -> Formula:
    """Parse ``f ::= letter | name(f, ..., f) | (f & f) | (f | f) | -f``."""
    return _Parser(text, C, allow_components).parse()


# --------------------------------------------------------------------------
# enumeration

def _signature(C: ConnectiveSet, name: str):
    c = C.connective(name)
    return c.input_types, c.output_type


def enumerate_by_depth(C: ConnectiveSet, depth: int, letters: Sequence[str] | None = None) -> list[list[Formula]]:
    """Formulas grouped by exact nesting depth ``0..depth``.

    Within one depth: Boolean nodes first (by type, ``&`` before ``|``),
    then primitive connectives in declaration order; arguments range over
    all shallower formulas in lexicographic order, with at least one of them
    exactly one level shallower.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    names = list(C.letters) if letters is None else list(letters)
    for nm in names:
        if nm not in C.letters:
            raise FormulaError(f"unknown letter {nm!r}")
    levels = [[Letter(nm, C.letters[nm].output_type) for nm in names]]
    by_type: dict[int, list[Formula]] = {}
    for f in levels[0]:
        by_type.setdefault(f.type, []).append(f)
    bool_kinds = sorted(C.booleans, key=lambda kk: (kk[1], kk[0] != "and"))
    sigs = [(nm, *_signature(C, nm)) for nm in C.order]
    for d in range(1, depth + 1):
        new: list[Formula] = []
        for kind, k in bool_kinds:
            pool = by_type.get(k, [])
            for a, b in itertools.product(pool, repeat=2):
                if max(a.depth, b.depth) == d - 1:
                    new.append(BoolOp(kind, a, b))
        for nm, inputs, out in sigs:
            pools = [by_type.get(k, []) for k in inputs]
            for args in itertools.product(*pools):
                if max((a.depth for a in args), default=-1) == d - 1:
                    new.append(Apply(nm, args, out))
        levels.append(new)
        for f in new:
            by_type.setdefault(f.type, []).append(f)
    return levels


def enumerate_formulas(C: ConnectiveSet, depth: int, letters: Sequence[str] | None = None) -> Iterator[Formula]:
    """Every well-typed formula of depth at most ``depth``, each exactly once."""
    for level in enumerate_by_depth(C, depth, letters):
        yield from level


# --------------------------------------------------------------------------
# molecular expansion

def expand_molecular(phi: Formula, C: ConnectiveSet) -> Formula:
    """Replace molecular applications by nested applications of their components."""
    if isinstance(phi, Letter):
        return phi
    if isinstance(phi, BoolOp):
        return BoolOp(phi.kind, expand_molecular(phi.left, C), expand_molecular(phi.right, C))
    args = [expand_molecular(a, C) for a in phi.args]
    if phi.conn not in C.moleculars:
        return Apply(phi.conn, args, phi.type, phi.negated)
    root = C.tree(phi.conn, phi.negated)
    it = iter(args)

    def build(node):
        if isinstance(node, IdLeaf):
            return next(it)
        if isinstance(node, LetterLeaf):
            base = C.letters[node.name]
            return Letter(node.name, base.output_type, node.skeleton != base)
        kids = [build(c) for c in node.children]
        return Apply(node.conn, kids, node.skeleton.output_type, node.negated)

    return build(root)


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    if isinstance(phi, Apply):
        for a in phi.args:
            yield from subformulas(a)
    elif isinstance(phi, BoolOp):
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)


def head_tree(C: ConnectiveSet, phi: Apply) -> Vertex:
    """Decomposition-tree root of the (possibly negated) head connective of ``phi``."""
    return C.tree(phi.conn, phi.negated)


__all__ = [
    "Apply",
    "BoolOp",
    "Formula",
    "FormulaError",
    "Letter",
    "apply",
    "boolop",
    "enumerate_by_depth",
    "enumerate_formulas",
    "expand_molecular",
    "head_tree",
    "letter",
    "negate",
    "parse",
    "pretty",
    "subformulas",
]
