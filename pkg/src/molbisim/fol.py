"""First-order formulas, the standard translation and a finite-structure evaluator.

The primitive basis is ``Bottom``, ``Atom``, ``Implies`` and ``Forall``;
``Not``, ``And``, ``Or`` and ``Exists`` are kept as nodes for readable output
and evaluated natively, and :meth:`FOFormula.expand` rewrites them into the
basis.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field, fields
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .semantics import CModel, PointedModel
from .skeletons import EXISTS, MINUS, ConnectiveSet, IdLeaf, LetterLeaf, relation_arities
from .syntax import Apply, BoolOp, Formula, Letter


class FOLError(ValueError):
    pass


# --------------------------------------------------------------------------
# terms and formulas

@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


Term = "Var | Const"


class FOFormula:
    """Base class: structural equality with a cached hash, cached free variables."""

    def _fields(self):
        return tuple(getattr(self, f.name) for f in fields(self))

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + self._fields())
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._fields() == other._fields()

    @cached_property
    def free_vars(self) -> frozenset:
        return self._free()

    @cached_property
    def constants(self) -> frozenset:
        return self._consts()

    def expand(self) -> "FOFormula":
        raise NotImplementedError

    def __str__(self):
        return show(self)


@dataclass(frozen=True, eq=False)
class Bottom(FOFormula):
    def _free(self):
        return frozenset()

    def _consts(self):
        return frozenset()

    def expand(self):
        return self


@dataclass(frozen=True, eq=False)
class Atom(FOFormula):
    pred: str
    terms: tuple

    def _free(self):
        return frozenset(t.name for t in self.terms if isinstance(t, Var))

    def _consts(self):
        return frozenset(t.name for t in self.terms if isinstance(t, Const))

    def expand(self):
        return self


@dataclass(frozen=True, eq=False)
class Implies(FOFormula):
    left: FOFormula
    right: FOFormula

    def _free(self):
        return self.left.free_vars | self.right.free_vars

    def _consts(self):
        return self.left.constants | self.right.constants

    def expand(self):
        return Implies(self.left.expand(), self.right.expand())


@dataclass(frozen=True, eq=False)
class Forall(FOFormula):
    var: str
    body: FOFormula

    def _free(self):
        return self.body.free_vars - {self.var}

    def _consts(self):
        return self.body.constants

    def expand(self):
        return Forall(self.var, self.body.expand())


@dataclass(frozen=True, eq=False)
class Not(FOFormula):
    body: FOFormula

    def _free(self):
        return self.body.free_vars

    def _consts(self):
        return self.body.constants

    def expand(self):
        return Implies(self.body.expand(), Bottom())


@dataclass(frozen=True, eq=False)
class And(FOFormula):
    left: FOFormula
    right: FOFormula

    def _free(self):
        return self.left.free_vars | self.right.free_vars

    def _consts(self):
        return self.left.constants | self.right.constants

    def expand(self):
        # a & b  ==  (a -> (b -> F)) -> F
        return Implies(Implies(self.left.expand(), Implies(self.right.expand(), Bottom())), Bottom())


@dataclass(frozen=True, eq=False)
class Or(FOFormula):
    left: FOFormula
    right: FOFormula

    def _free(self):
        return self.left.free_vars | self.right.free_vars

    def _consts(self):
        return self.left.constants | self.right.constants

    def expand(self):
        # a | b  ==  (a -> F) -> b
        return Implies(Implies(self.left.expand(), Bottom()), self.right.expand())


@dataclass(frozen=True, eq=False)
class Exists(FOFormula):
    var: str
    body: FOFormula

    def _free(self):
        return self.body.free_vars - {self.var}

    def _consts(self):
        return self.body.constants

    def expand(self):
        return Implies(Forall(self.var, Implies(self.body.expand(), Bottom())), Bottom())


def show(f: FOFormula) -> str:
    if isinstance(f, Bottom):
        return "⊥"
    if isinstance(f, Atom):
        return f"{f.pred}(" + ",".join(map(str, f.terms)) + ")"
    if isinstance(f, Not):
        return "¬" + show(f.body)
    if isinstance(f, (Forall, Exists)):
        q = "∀" if isinstance(f, Forall) else "∃"
        return f"{q}{f.var} {show(f.body)}"
    op = {Implies: "→", And: "∧", Or: "∨"}[type(f)]
    return f"({show(f.left)} {op} {show(f.right)})"


def predicates(f: FOFormula) -> dict[str, int]:
    """Predicate symbols with their arities."""
    out: dict[str, int] = {}

    def go(g):
        if isinstance(g, Atom):
            out.setdefault(g.pred, len(g.terms))
        elif isinstance(g, (Implies, And, Or)):
            go(g.left)
            go(g.right)
        elif isinstance(g, (Forall, Exists, Not)):
            go(g.body)

    go(f)
    return out


def is_basic(f: FOFormula) -> bool:
    """True when only the primitive connectives occur."""
    if isinstance(f, (Bottom, Atom)):
        return True
    if isinstance(f, Implies):
        return is_basic(f.left) and is_basic(f.right)
    if isinstance(f, Forall):
        return is_basic(f.body)
    return False


# --------------------------------------------------------------------------
# standard translation

def _var_name(i: int) -> str:
    return f"x{i}"


class Translator:
    """Standard translation into first-order logic, memoised per subformula.

    Fresh variables are ``x1, x2, ...``; a counter threaded through the
    recursion hands every quantifier block variables numbered above all
    variables used by its ancestors, so sibling subformulas may reuse names.
    """

    def __init__(self, C: ConnectiveSet):
        self.C = C
        self._memo: dict = {}

    def __call__(self, phi: Formula, xs: Sequence[str] | str = ("x",), start: int = 1) -> FOFormula:
        if isinstance(xs, str):
            xs = (xs,)
        xs = tuple(xs)
        if len(xs) != phi.type:
            raise FOLError(f"formula of type {phi.type} needs {phi.type} variable(s), got {len(xs)}")
        return self.translate(phi, xs, start)

    def translate(self, phi: Formula, xs: tuple[str, ...], nxt: int) -> FOFormula:
        key = (phi, xs, nxt)
        out = self._memo.get(key)
        if out is not None:
            return out
        if isinstance(phi, Letter):
            s = self.C.letters[phi.name]
            s = s.negated() if phi.negated else s
            out = self._letter(phi.name, s, xs)
        elif isinstance(phi, BoolOp):
            a = self.translate(phi.left, xs, nxt)
            b = self.translate(phi.right, xs, nxt)
            out = And(a, b) if phi.kind == "and" else Or(a, b)
        elif isinstance(phi, Apply):
            root = self.C.tree(phi.conn, phi.negated)
            args = iter(phi.args)
            out = self._node(root, xs, nxt, args)
        else:
            raise FOLError(f"not a formula: {phi!r}")
        self._memo[key] = out
        return out

    def _letter(self, name, skeleton, xs) -> FOFormula:
        atom = Atom(self.C.group(name), tuple(Var(x) for x in xs))
        return Not(atom) if skeleton.sign == MINUS else atom

    def _node(self, node, xs, nxt, args) -> FOFormula:
        if isinstance(node, IdLeaf):
            return self.translate(next(args), xs, nxt)
        if isinstance(node, LetterLeaf):
            return self._letter(node.name, node.skeleton, xs)
        s = node.skeleton
        blocks = []
        cur = nxt
        for k in s.input_types:
            blocks.append(tuple(_var_name(cur + i) for i in range(k)))
            cur += k
        parts = []
        for child, ton, block in zip(node.children, s.tonicity, blocks):
            sub = self._node(child, block, cur, args)
            parts.append(Not(sub) if ton == MINUS else sub)
        parts.append(relation_literal(self.C.group(node.conn), s, blocks + [xs]))
        join = And if s.quant == EXISTS else Or
        body = parts[0]
        for p in parts[1:]:
            body = join(body, p)
        quant = Exists if s.quant == EXISTS else Forall
        for block in reversed(blocks):
            for v in reversed(block):
                body = quant(v, body)
        return body


def relation_literal(pred: str, skeleton, blocks: Sequence[Sequence[str]]) -> FOFormula:
    """``±R^σ`` on the given variable blocks: one base predicate, arguments reordered."""
    inv = skeleton.perm.inverse()
    terms = []
    for i in range(1, skeleton.perm.degree + 1):
        terms.extend(Var(v) for v in blocks[inv(i) - 1])
    atom = Atom(pred, tuple(terms))
    return Not(atom) if skeleton.sign == MINUS else atom


def st_translate(phi: Formula, xs, C: ConnectiveSet) -> FOFormula:
    return Translator(C)(phi, xs)


# --------------------------------------------------------------------------
# structures and evaluation

@dataclass
class FOStructure:
    """Domain size, predicate tables and an assignment of variables/constants."""

    size: int
    predicates: Mapping[str, np.ndarray]
    assignment: dict = field(default_factory=dict)
    worlds: tuple = ()

    def __post_init__(self):
        if self.size < 1:
            raise FOLError("the domain must be non-empty")


def associated_structure(pm: PointedModel, xs: Sequence[str], C: ConnectiveSet | None = None) -> FOStructure:
    """Copy the relations of ``pm.model`` as predicates and send ``xs[i]`` to ``point[i]``."""
    xs = (xs,) if isinstance(xs, str) else tuple(xs)
    if len(xs) != len(pm.point):
        raise FOLError(f"{len(xs)} variable(s) for a point of type {len(pm.point)}")
    M = pm.model
    preds = {}
    for g in M.relations:
        arity = M.arities.get(g)
        if arity is None and C is not None:
            arity = relation_arities(C).get(g)
        if arity is None:
            continue
        preds[g] = M.dense(g, arity)
    return FOStructure(M.size, preds, dict(zip(xs, pm.point)), M.worlds)


class FOEvaluator:
    """Truth tables of FO formulas over a batch of same-size structures.

    A table is ``(vars, array)`` with ``vars`` the sorted free variables
    (constants are tracked as variables named ``'#c'``) and ``array`` of
    shape ``(B, n, ..., n)``, one axis per variable.
    """

    def __init__(self, size: int, predicates: Sequence[Mapping[str, np.ndarray]]):
        self.n = size
        self.B = len(predicates)
        self.preds = predicates
        self._stack: dict = {}
        self._memo: dict = {}

    @classmethod
    def for_models(cls, models: Sequence[CModel], C: ConnectiveSet):
        ar = relation_arities(C)
        preds = [{g: m.dense(g, a) for g, a in ar.items() if g in m.relations} for m in models]
        return cls(models[0].size, preds)

    def pred(self, name: str, arity: int) -> np.ndarray:
        arr = self._stack.get(name)
        if arr is None:
            if name == "=" and arity == 2:
                arr = np.broadcast_to(np.eye(self.n, dtype=bool), (self.B, self.n, self.n))
            else:
                try:
                    arr = np.stack([p[name] for p in self.preds])
                except KeyError:
                    raise FOLError(f"unknown predicate {name!r}") from None
            if arr.ndim - 1 != arity:
                raise FOLError(f"predicate {name} has arity {arr.ndim - 1}, used with {arity} argument(s)")
            self._stack[name] = arr
        return arr

    @staticmethod
    def _term_key(t) -> str:
        return t.name if isinstance(t, Var) else "#" + t.name

    def _align(self, vs, arr, target):
        """Broadcast a table over ``vs`` to the axis layout of ``target``."""
        if vs == target:
            return arr
        shape = [self.B] + [self.n if v in vs else 1 for v in target]
        order = [0] + [1 + vs.index(v) for v in target if v in vs]
        return np.transpose(arr, order).reshape(shape)

    def table(self, f: FOFormula):
        out = self._memo.get(f)
        if out is not None:
            return out
        if isinstance(f, Bottom):
            out = ((), np.zeros((self.B,), dtype=bool))
        elif isinstance(f, Atom):
            keys = [self._term_key(t) for t in f.terms]
            vs = tuple(sorted(set(keys)))
            arr = self.pred(f.pred, len(keys))
            letters = string.ascii_letters
            sub = "Z" + "".join(letters[keys.index(k)] for k in keys)
            res = "Z" + "".join(letters[keys.index(v)] for v in vs)
            out = (vs, np.einsum(f"{sub}->{res}", arr))
        elif isinstance(f, Not):
            vs, arr = self.table(f.body)
            out = (vs, ~arr)
        elif isinstance(f, (Implies, And, Or)):
            lv, la = self.table(f.left)
            rv, ra = self.table(f.right)
            vs = tuple(sorted(set(lv) | set(rv)))
            a, b = self._align(lv, la, vs), self._align(rv, ra, vs)
            if isinstance(f, Implies):
                arr = ~a | b
            elif isinstance(f, And):
                arr = a & b
            else:
                arr = a | b
            out = (vs, np.broadcast_to(arr, (self.B,) + (self.n,) * len(vs)))
        elif isinstance(f, (Forall, Exists)):
            bv, ba = self.table(f.body)
            if f.var in bv:
                ax = 1 + bv.index(f.var)
                arr = ba.all(axis=ax) if isinstance(f, Forall) else ba.any(axis=ax)
                out = (tuple(v for v in bv if v != f.var), arr)
            else:
                out = (bv, ba)
        else:
            raise FOLError(f"not a first-order formula: {f!r}")
        self._memo[f] = out
        return out

    def holds_at(self, f: FOFormula, assignment: Mapping[str, int]) -> np.ndarray:
        """Truth value per structure under ``assignment`` (one bool per batch entry)."""
        vs, arr = self.table(f)
        idx = []
        for v in vs:
            if v not in assignment:
                raise FOLError(f"unassigned {'constant' if v.startswith('#') else 'variable'} {v.lstrip('#')}")
            idx.append(assignment[v])
        return arr[(slice(None),) + tuple(idx)]


def fol_eval(S: FOStructure, f: FOFormula) -> bool:
    ev = FOEvaluator(S.size, [S.predicates])
    assignment = {}
    for k, v in S.assignment.items():
        assignment[k] = v
    for c in f.constants:
        if c in S.assignment:
            assignment["#" + c] = S.assignment[c]
    return bool(ev.holds_at(f, assignment)[0])


def st_tables(C: ConnectiveSet, models: Sequence[CModel], f: FOFormula, xs: Sequence[str],
              ev: FOEvaluator | None = None) -> np.ndarray:
    """Truth set of an open formula with free variables ``xs``, as ``(B, n**k)``.

    Passing an evaluator built by :meth:`FOEvaluator.for_models` for the
    same models shares subformula tables between calls.
    """
    ev = ev or FOEvaluator.for_models(models, C)
    vs, arr = ev.table(f)
    full = ev._align(vs, arr, tuple(xs))
    full = np.broadcast_to(full, (ev.B,) + (ev.n,) * len(xs))
    return full.reshape(ev.B, -1)
