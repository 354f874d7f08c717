"""TPTP and SMT-LIB serialisation of first-order formulas, with re-parsers.

Both writers are deterministic.  Variables are rendered upper-case in TPTP
(``x1`` becomes ``X1``) and kept as-is in SMT-LIB; predicate symbols keep
their relation names.  The TPTP writer universally closes the formula and
records the open formula in a comment; the SMT-LIB writer declares free
variables as constants of sort ``World``.
"""

from __future__ import annotations

import re
from typing import Sequence

from .fol import (
    And,
    Atom,
    Bottom,
    Const,
    Exists,
    FOFormula,
    Forall,
    Implies,
    Not,
    Or,
    Var,
    predicates,
    show,
)


class ExportError(ValueError):
    pass


# --------------------------------------------------------------------------
# TPTP

def _tptp_var(name: str) -> str:
    return name[:1].upper() + name[1:]


def _tptp_term(t) -> str:
    if isinstance(t, Var):
        return _tptp_var(t.name)
    if not re.fullmatch(r"[a-z][A-Za-z0-9_]*", t.name):
        raise ExportError(f"constant {t.name!r} is not a TPTP lower word")
    return t.name


def _tptp_functor(name: str) -> str:
    """Lower words are written bare, anything else as a single-quoted atom."""
    if re.fullmatch(r"[a-z][A-Za-z0-9_]*", name):
        return name
    if "'" in name or "\\" in name:
        raise ExportError(f"predicate {name!r} cannot be written in TPTP")
    return f"'{name}'"


def tptp_formula(f: FOFormula) -> str:
    if isinstance(f, Bottom):
        return "$false"
    if isinstance(f, Atom):
        if f.pred == "=" and len(f.terms) == 2:
            return f"{_tptp_term(f.terms[0])} = {_tptp_term(f.terms[1])}"
        if not f.terms:
            return _tptp_functor(f.pred)
        return _tptp_functor(f.pred) + "(" + ",".join(_tptp_term(t) for t in f.terms) + ")"
    if isinstance(f, Not):
        return "~" + tptp_formula(f.body)
    if isinstance(f, (Forall, Exists)):
        q = "!" if isinstance(f, Forall) else "?"
        return f"{q}[{_tptp_var(f.var)}]: " + tptp_formula(f.body)
    op = {Implies: "=>", And: "&", Or: "|"}[type(f)]
    return f"({tptp_formula(f.left)} {op} {tptp_formula(f.right)})"


def close(f: FOFormula, free: Sequence[str] | None = None) -> FOFormula:
    """Universal closure, binding ``free`` (or the sorted free variables) outermost first."""
    names = list(free) if free is not None else sorted(f.free_vars)
    extra = sorted(f.free_vars - set(names))
    for v in reversed(names + extra):
        f = Forall(v, f)
    return f


def to_tptp(f: FOFormula, free: Sequence[str] | None = None, name: str = "f1",
            source: str | None = None, role: str = "axiom") -> str:
    free = list(free) if free is not None else sorted(f.free_vars)
    lines = []
    if source:
        lines.append(f"% connectives: {source}")
    lines.append("% free variables: " + (", ".join(free) if free else "none"))
    lines.append(f"% open formula: {show(f)}")
    lines.append(f"fof({name}, {role}, {tptp_formula(close(f, free))}).")
    return "\n".join(lines) + "\n"


_TPTP_TOKEN = re.compile(r"\s*(\$false|\$true|=>|[A-Za-z][A-Za-z0-9_]*|'[^'\\]+'|[()\[\],:.!?~&|=])")


def _tokenize(text: str, pattern) -> list[str]:
    out, pos = [], 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            return out
        m = pattern.match(text, pos)
        if not m:
            raise ExportError(f"unexpected character {text[pos]!r} at offset {pos}")
        out.append(m.group(1))
        pos = m.end()


class _TPTPParser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ExportError(f"expected {expected!r}, got {tok!r}")
        self.i += 1
        return tok

    def annotated(self):
        self.take("fof")
        self.take("(")
        name = self.take()
        self.take(",")
        role = self.take()
        self.take(",")
        f = self.formula()
        self.take(")")
        self.take(".")
        return name, role, f

    def formula(self):
        left = self.unitary()
        op = self.peek()
        if op in ("&", "|", "=>"):
            while self.peek() == op:
                self.take(op)
                right = self.unitary()
                left = {"&": And, "|": Or, "=>": Implies}[op](left, right)
            if self.peek() in ("&", "|", "=>"):
                raise ExportError("mixed binary connectives need parentheses")
        return left

    def term(self):
        tok = self.take()
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", tok):
            raise ExportError(f"bad term {tok!r}")
        return Var(tok[:1].lower() + tok[1:]) if tok[0].isupper() else Const(tok)

    def unitary(self):
        tok = self.peek()
        if tok == "(":
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        if tok == "~":
            self.take("~")
            return Not(self.unitary())
        if tok in ("!", "?"):
            self.take(tok)
            self.take("[")
            names = [self.take()]
            while self.peek() == ",":
                self.take(",")
                names.append(self.take())
            self.take("]")
            self.take(":")
            body = self.unitary()
            for nm in reversed(names):
                if not nm[0].isupper():
                    raise ExportError(f"quantified variable {nm!r} must be upper-case")
                v = nm[:1].lower() + nm[1:]
                body = Forall(v, body) if tok == "!" else Exists(v, body)
            return body
        if tok == "$false":
            self.take()
            return Bottom()
        if tok == "$true":
            self.take()
            return Implies(Bottom(), Bottom())
        quoted = tok is not None and len(tok) > 2 and tok[0] == tok[-1] == "'"
        if tok is None or not (quoted or re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", tok)):
            raise ExportError(f"unexpected token {tok!r}")
        if quoted:
            tok = tok[1:-1]
        elif tok[0].isupper():
            left = self.term()
            self.take("=")
            return Atom("=", (left, self.term()))
        self.take()
        if self.peek() == "(":
            self.take("(")
            terms = [self.term()]
            while self.peek() == ",":
                self.take(",")
                terms.append(self.term())
            self.take(")")
            return Atom(tok, tuple(terms))
        if self.peek() == "=":
            self.take("=")
            return Atom("=", (Const(tok), self.term()))
        return Atom(tok, ())


def parse_tptp(text: str) -> list[tuple[str, str, FOFormula]]:
    """Parse ``fof`` statements, ignoring ``%`` comment lines."""
    body = "\n".join(line for line in text.splitlines() if not line.lstrip().startswith("%"))
    p = _TPTPParser(_tokenize(body, _TPTP_TOKEN))
    out = []
    while p.peek() is not None:
        out.append(p.annotated())
    if not out:
        raise ExportError("no fof statement found")
    return out


# --------------------------------------------------------------------------
# SMT-LIB

def _smt_term(t) -> str:
    return t.name


def smt_formula(f: FOFormula) -> str:
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        if not f.terms:
            return f.pred
        return f"({f.pred} " + " ".join(_smt_term(t) for t in f.terms) + ")"
    if isinstance(f, Not):
        return f"(not {smt_formula(f.body)})"
    if isinstance(f, (Forall, Exists)):
        q = "forall" if isinstance(f, Forall) else "exists"
        return f"({q} (({f.var} World)) {smt_formula(f.body)})"
    op = {Implies: "=>", And: "and", Or: "or"}[type(f)]
    return f"({op} {smt_formula(f.left)} {smt_formula(f.right)})"


def to_smtlib(f: FOFormula, free: Sequence[str] | None = None, source: str | None = None) -> str:
    free = list(free) if free is not None else sorted(f.free_vars)
    free += sorted(f.free_vars - set(free))
    lines = []
    if source:
        lines.append(f"; connectives: {source}")
    lines.append("; free variables: " + (", ".join(free) if free else "none"))
    lines.append("(set-logic UF)")
    lines.append("(declare-sort World 0)")
    for p, arity in sorted(predicates(f).items()):
        if p == "=":
            continue
        lines.append(f"(declare-fun {p} (" + " ".join(["World"] * arity) + ") Bool)")
    for v in free:
        lines.append(f"(declare-const {v} World)")
    for c in sorted(f.constants):
        lines.append(f"(declare-const {c} World)")
    lines.append(f"(assert {smt_formula(f)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def _sexprs(text: str):
    toks = re.findall(r"\(|\)|[^\s()]+", "\n".join(l.split(";", 1)[0] for l in text.splitlines()))
    stack: list[list] = [[]]
    for tok in toks:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ExportError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ExportError("unbalanced '('")
    return stack[0]


def parse_smtlib(text: str) -> tuple[dict, list[FOFormula]]:
    """Parse the subset written by :func:`to_smtlib`; returns declarations and assertions.

    Constants listed in the ``; free variables:`` comment come back as
    :class:`Var` terms, so the asserted formula equals the exported open
    formula; other declared constants become :class:`Const` terms.  Without
    that comment every constant is read as a variable.
    """
    m = re.search(r"^; free variables: (.*)$", text, re.MULTILINE)
    free = None if m is None else {v.strip() for v in m.group(1).split(",")} - {"none"}
    decls = {"sorts": set(), "funs": {}, "consts": [], "free": free}
    asserts = []
    for cmd in _sexprs(text):
        if not isinstance(cmd, list) or not cmd or not isinstance(cmd[0], str):
            raise ExportError(f"malformed command {cmd!r}")
        head = cmd[0]
        if head == "set-logic":
            continue
        if head == "declare-sort":
            decls["sorts"].add(cmd[1])
        elif head == "declare-fun":
            name, args, ret = cmd[1], cmd[2], cmd[3]
            if ret != "Bool" or any(a not in decls["sorts"] for a in args):
                raise ExportError(f"unsupported declaration of {name}")
            decls["funs"][name] = len(args)
        elif head == "declare-const":
            if cmd[2] not in decls["sorts"]:
                raise ExportError(f"unknown sort {cmd[2]}")
            decls["consts"].append(cmd[1])
        elif head == "assert":
            asserts.append(_smt_to_fo(cmd[1], decls, frozenset()))
        elif head in ("check-sat", "exit"):
            continue
        else:
            raise ExportError(f"unsupported command {head}")
    return decls, asserts


def _smt_to_fo(e, decls, bound) -> FOFormula:
    if isinstance(e, str):
        if e == "false":
            return Bottom()
        if e == "true":
            return Implies(Bottom(), Bottom())
        if decls["funs"].get(e) == 0:
            return Atom(e, ())
        raise ExportError(f"unknown symbol {e}")
    head = e[0]
    if head in ("forall", "exists"):
        binders, body = e[1], e[2]
        names = []
        for b in binders:
            if len(b) != 2 or b[1] not in decls["sorts"]:
                raise ExportError(f"bad binder {b!r}")
            names.append(b[0])
        f = _smt_to_fo(body, decls, bound | set(names))
        for nm in reversed(names):
            f = Forall(nm, f) if head == "forall" else Exists(nm, f)
        return f
    if head == "not":
        return Not(_smt_to_fo(e[1], decls, bound))
    if head in ("and", "or", "=>"):
        parts = [_smt_to_fo(x, decls, bound) for x in e[1:]]
        if len(parts) < 2:
            raise ExportError(f"{head} needs two operands")
        cls = {"and": And, "or": Or, "=>": Implies}[head]
        if head == "=>":
            out = parts[-1]
            for p in reversed(parts[:-1]):
                out = cls(p, out)
            return out
        out = parts[0]
        for p in parts[1:]:
            out = cls(out, p)
        return out
    if head == "=" or head in decls["funs"]:
        args = e[1:]
        if head != "=" and len(args) != decls["funs"][head]:
            raise ExportError(f"{head} expects {decls['funs'][head]} argument(s)")
        terms = []
        for a in args:
            if not isinstance(a, str) or (a not in bound and a not in decls["consts"]):
                raise ExportError(f"undeclared term {a!r}")
            free = decls.get("free")
            is_var = a in bound or free is None or a in free
            terms.append(Var(a) if is_var else Const(a))
        return Atom(head, tuple(terms))
    raise ExportError(f"unknown operator {head!r}")


def export(f: FOFormula, fmt: str, free: Sequence[str] | None = None, source: str | None = None) -> str:
    if fmt == "tptp":
        return to_tptp(f, free, source=source)
    if fmt == "smtlib":
        return to_smtlib(f, free, source=source)
    raise ExportError(f"unknown format {fmt!r} (use tptp or smtlib)")


def roundtrip_ok(f: FOFormula, fmt: str, free: Sequence[str] | None = None) -> bool:
    """Export ``f`` and check that the re-parsed statement is the same formula."""
    text = export(f, fmt, free)
    if fmt == "tptp":
        (_, _, g), = parse_tptp(text)
        return g == close(f, free)
    _, asserts = parse_smtlib(text)
    return len(asserts) == 1 and asserts[0] == f
