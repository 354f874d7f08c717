"""Finite C-models, the model file format and the batched model checker."""

from __future__ import annotations

import itertools
import os
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .skeletons import EXISTS, MINUS, PLUS, AtomicSkeleton, ConnectiveSet, IdLeaf, LetterLeaf, relation_arities
from .syntax import Apply, BoolOp, Formula, FormulaError, Letter, negate


class ModelError(ValueError):
    """Malformed model, missing relation or violated side condition."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class CModel:
    """A finite domain with named relations.

    Relations are stored as frozensets of index tuples under their relation
    group name (letters included).  Dense boolean arrays are built on demand
    and cached.
    """

    def __init__(self, worlds: Sequence[str], relations: Mapping[str, Iterable] | None = None,
                 name: str = "M", point: Sequence | None = None):
        self.worlds = tuple(str(w) for w in worlds)
        if not self.worlds:
            raise ModelError("the domain must be non-empty")
        if len(set(self.worlds)) != len(self.worlds):
            raise ModelError("duplicate world names")
        self.index = {w: i for i, w in enumerate(self.worlds)}
        self.name = name
        self.relations: dict[str, frozenset] = {}
        self.arities: dict[str, int] = {}
        for g, tuples in (relations or {}).items():
            self.add_relation(g, tuples)
        self.point = None if point is None else tuple(self._idx(w) for w in point)
        self._dense: dict = {}
        self._lits: dict = {}

    @classmethod
    def from_indices(cls, n: int, relations: Mapping[str, Iterable], name="M", point=None):
        return cls([f"w{i}" for i in range(n)], relations, name, point)

    @property
    def size(self) -> int:
        return len(self.worlds)

    def _idx(self, w) -> int:
        if isinstance(w, (int, np.integer)):
            if not 0 <= int(w) < self.size:
                raise ModelError(f"world index {w} out of range")
            return int(w)
        try:
            return self.index[str(w)]
        except KeyError:
            raise ModelError(f"unknown world {w!r}") from None

    def add_relation(self, group: str, tuples: Iterable, arity: int | None = None):
        rows = set()
        for t in tuples:
            if isinstance(t, (str, int, np.integer)):
                t = (t,)
            rows.add(tuple(self._idx(w) for w in t))
        lengths = {len(t) for t in rows}
        if len(lengths) > 1:
            raise ModelError(f"relation {group} mixes tuple lengths {sorted(lengths)}")
        if arity is None and lengths:
            arity = lengths.pop()
        if arity is not None and rows and len(next(iter(rows))) != arity:
            raise ModelError(f"relation {group} has tuples of length {len(next(iter(rows)))}, expected {arity}")
        self.relations[group] = frozenset(rows)
        if arity is not None:
            self.arities[group] = arity
        getattr(self, "_dense", {}).clear()
        getattr(self, "_lits", {}).clear()

    def holds(self, group: str, t: Sequence[int]) -> bool:
        return tuple(t) in self.relations[group]

    def dense(self, group: str, arity: int) -> np.ndarray:
        """Relation ``group`` as a bool array of shape ``(n,) * arity``."""
        key = (group, arity)
        arr = self._dense.get(key)
        if arr is None:
            if group not in self.relations:
                raise ModelError(f"model {self.name} has no relation {group!r}")
            known = self.arities.get(group)
            if known is not None and known != arity:
                raise ModelError(f"relation {group} of model {self.name} has arity {known}, the logic needs {arity}")
            arr = np.zeros((self.size,) * arity, dtype=np.bool_)
            if self.relations[group]:
                idx = np.array(sorted(self.relations[group]), dtype=np.int64)
                arr[tuple(idx.T)] = True
            arr.setflags(write=False)
            self._dense[key] = arr
        return arr

    def literal(self, skeleton: AtomicSkeleton, group: str) -> np.ndarray:
        """``±R^σ`` in block order, flattened to ``(A, N)``.

        Axis 0 enumerates the argument tuples ``(x1..xn)`` (first block most
        significant), axis 1 the output tuples ``x``.
        """
        key = (group, skeleton.perm, skeleton.sign, skeleton.types)
        lit = self._lits.get(key)
        if lit is None:
            lit = block_literal(self.dense(group, skeleton.relation_arity)[None], skeleton, self.size)[0]
            lit.setflags(write=False)
            self._lits[key] = lit
        return lit

    def tuples(self, k: int):
        return itertools.product(range(self.size), repeat=k)

    def name_of(self, t: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.worlds[i] for i in t)

    def __repr__(self):
        return f"CModel({self.name!r}, {self.size} worlds, relations={sorted(self.relations)})"


@dataclass(frozen=True)
class PointedModel:
    model: CModel
    point: tuple[int, ...]

    @property
    def type(self) -> int:
        return len(self.point)

    @classmethod
    def of(cls, model: CModel, point=None) -> "PointedModel":
        p = model.point if point is None else tuple(model._idx(w) for w in (point if isinstance(point, (tuple, list)) else (point,)))
        if p is None:
            raise ModelError(f"model {model.name} has no point")
        return cls(model, tuple(p))


def block_literal(dense: np.ndarray, skeleton: AtomicSkeleton, n: int) -> np.ndarray:
    """Batch version of :meth:`CModel.literal`: ``(B, n,...,n)`` to ``(B, A, N)``."""
    B = dense.shape[0]
    layout = skeleton.relation_layout()
    grouped = dense.reshape((B,) + tuple(n ** k for k in layout))
    degree = skeleton.perm.degree
    # block j (1-based) sits at relation position perm(j)
    axes = [0] + [skeleton.perm(j) for j in range(1, degree + 1)]
    ordered = np.transpose(grouped, axes)
    if skeleton.sign == MINUS:
        ordered = ~ordered
    N = n ** skeleton.output_type
    return np.ascontiguousarray(ordered.reshape(B, -1, N))


def letter_denotation(dense: np.ndarray, skeleton: AtomicSkeleton) -> np.ndarray:
    flat = dense.reshape(dense.shape[0], -1)
    return ~flat if skeleton.sign == MINUS else flat


# --------------------------------------------------------------------------
# evaluation

class Evaluator:
    """Denotations of formulas over a batch of same-size models.

    ``denote(phi)`` returns a bool array ``(B, n**k)`` whose row ``b`` is the
    truth set of ``phi`` in ``models[b]``.  Results are memoised per formula.
    """

    def __init__(self, C: ConnectiveSet, models: Sequence[CModel]):
        if not models:
            raise ValueError("need at least one model")
        sizes = {m.size for m in models}
        if len(sizes) != 1:
            raise ValueError("a batch must contain models of one size")
        self.C = C
        self.models = list(models)
        self.n = sizes.pop()
        self.B = len(self.models)
        self._memo: dict = {}
        self._dense: dict = {}
        self._lits: dict = {}
        self._letters: dict = {}

    def dense(self, group: str, arity: int) -> np.ndarray:
        key = (group, arity)
        arr = self._dense.get(key)
        if arr is None:
            arr = np.stack([m.dense(group, arity) for m in self.models])
            self._dense[key] = arr
        return arr

    def literal(self, skeleton: AtomicSkeleton, group: str) -> np.ndarray:
        key = (group, skeleton.perm, skeleton.sign, skeleton.types)
        lit = self._lits.get(key)
        if lit is None:
            lit = block_literal(self.dense(group, skeleton.relation_arity), skeleton, self.n)
            self._lits[key] = lit
        return lit

    def letter(self, name: str, skeleton: AtomicSkeleton) -> np.ndarray:
        key = (name, skeleton.sign)
        out = self._letters.get(key)
        if out is None:
            out = letter_denotation(self.dense(self.C.group(name), skeleton.output_type), skeleton)
            self._letters[key] = out
        return out

    def apply_skeleton(self, skeleton: AtomicSkeleton, group: str, args: Sequence[np.ndarray]) -> np.ndarray:
        lit = self.literal(skeleton, group)
        tonic = tuple(t == PLUS for t in skeleton.tonicity)
        return kernels.truth(lit, list(args), tonic, skeleton.quant == EXISTS)

    def apply_tree(self, node, args: Sequence[np.ndarray]) -> np.ndarray:
        """Evaluate a decomposition tree with its id leaves bound to ``args``."""
        it = iter(args)

        def go(nd):
            if isinstance(nd, IdLeaf):
                return next(it)
            if isinstance(nd, LetterLeaf):
                return self.letter(nd.name, nd.skeleton)
            kids = [go(c) for c in nd.children]
            return self.apply_skeleton(nd.skeleton, self.C.group(nd.conn), kids)

        out = go(node)
        return out

    def denote(self, phi: Formula) -> np.ndarray:
        out = self._memo.get(phi)
        if out is not None:
            return out
        if isinstance(phi, Letter):
            s = self.C.letters[phi.name]
            out = self.letter(phi.name, s.negated() if phi.negated else s)
        elif isinstance(phi, BoolOp):
            a, b = self.denote(phi.left), self.denote(phi.right)
            out = (a & b) if phi.kind == "and" else (a | b)
        elif isinstance(phi, Apply):
            args = [self.denote(a) for a in phi.args]
            out = self.apply_tree(self.C.tree(phi.conn, phi.negated), args)
        else:
            raise FormulaError(f"not a formula: {phi!r}")
        self._memo[phi] = out
        return out

    def clear(self):
        self._memo.clear()


def group_by_size(models: Sequence[CModel]) -> dict[int, list[int]]:
    """Indices of ``models`` grouped by domain size."""
    out: dict[int, list[int]] = {}
    for i, m in enumerate(models):
        out.setdefault(m.size, []).append(i)
    return out


def interpret(phi: Formula, M: CModel, C: ConnectiveSet) -> set[tuple[str, ...]]:
    """Truth set of ``phi`` in ``M`` as a set of world-name tuples."""
    den = Evaluator(C, [M]).denote(phi)[0]
    k = phi.type
    return {M.name_of(np.unravel_index(i, (M.size,) * k)) for i in np.flatnonzero(den)}


def interpret_indices(phi: Formula, M: CModel, C: ConnectiveSet) -> np.ndarray:
    return Evaluator(C, [M]).denote(phi)[0]


def flat_index(t: Sequence[int], n: int) -> int:
    return int(np.ravel_multi_index(tuple(t), (n,) * len(t))) if t else 0


def satisfies(pm: PointedModel, phi: Formula, C: ConnectiveSet) -> bool:
    if pm.type != phi.type:
        raise FormulaError(f"point has type {pm.type} but the formula has type {phi.type}")
    den = Evaluator(C, [pm.model]).denote(phi)[0]
    return bool(den[flat_index(pm.point, pm.model.size)])


def complement_check(phi: Formula, M: CModel, C: ConnectiveSet) -> bool:
    """True iff the truth set of ``-phi`` is the complement of that of ``phi``."""
    ev = Evaluator(C, [M])
    return bool(np.array_equal(ev.denote(negate(phi)), ~ev.denote(phi)))


# --------------------------------------------------------------------------
# intuitionistic models

def is_preorder(n: int, pairs: Iterable[tuple[int, int]]) -> bool:
    R = np.zeros((n, n), dtype=bool)
    for a, b in pairs:
        R[a, b] = True
    if not R.diagonal().all():
        return False
    R2 = (R.astype(np.int32) @ R.astype(np.int32)) > 0
    return bool(not (R2 & ~R).any())


def is_persistent(pairs: Iterable[tuple[int, int]], upset: Iterable[int]) -> bool:
    s = set(upset)
    return all(b in s for a, b in pairs if a in s)


def derive_intuitionistic(M: CModel, order: str = "r", letters: Sequence[str] = ("p",),
                          implication: str = "imp", constants: bool = True) -> CModel:
    """Add the ternary implication relation ``{(u,v,w) : u<=w and v<=w}``.

    ``M`` must interpret ``order`` as a preorder and every listed letter as
    an upward-closed set.  The result keeps all relations of ``M``, adds the
    implication relation and, when ``constants`` is set, ``top`` and ``bot``
    interpreted by the whole domain.
    """
    pairs = M.relations.get(order)
    if pairs is None:
        raise ModelError(f"model {M.name} has no relation {order!r}")
    if not is_preorder(M.size, pairs):
        raise ModelError(f"relation {order} of model {M.name} is not reflexive and transitive")
    for p in letters:
        vals = M.relations.get(p, frozenset())
        if not is_persistent(pairs, (t[0] for t in vals)):
            raise ModelError(f"letter {p} of model {M.name} is not persistent along {order}")
    rel = {g: set(t) for g, t in M.relations.items()}
    succ: dict[int, set[int]] = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    rel[implication] = {(u, v, w) for u in range(M.size) for v in range(M.size)
                        for w in succ.get(u, set()) & succ.get(v, set())}
    if constants:
        rel.setdefault("top", {(i,) for i in range(M.size)})
        rel.setdefault("bot", {(i,) for i in range(M.size)})
    out = CModel(M.worlds, {}, M.name, None)
    for g, rows in rel.items():
        out.add_relation(g, rows, M.arities.get(g) if g != implication else 3)
    out.point = M.point
    return out


# --------------------------------------------------------------------------
# model files

def _split_tuples(body: str, lineno: int) -> list[tuple[str, ...]]:
    out = []
    for chunk in body.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if chunk.startswith("("):
            if not chunk.endswith(")"):
                raise ModelError(f"unbalanced parentheses in {chunk!r}", lineno)
            items = [x.strip() for x in chunk[1:-1].split(",")]
        else:
            if "," in chunk or " " in chunk:
                raise ModelError(f"tuples of length > 1 need parentheses: {chunk!r}", lineno)
            items = [chunk]
        if any(not x for x in items):
            raise ModelError(f"empty world name in {chunk!r}", lineno)
        out.append(tuple(items))
    return out


def parse_model(text: str, name: str = "M") -> CModel:
    """Parse ``model/domain/rel/letter/point`` lines into a :class:`CModel`."""
    worlds = None
    pending: list[tuple[int, str, str]] = []
    point = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "model":
            name = rest or name
        elif head == "domain":
            worlds = rest.split()
            if not worlds:
                raise ModelError("the domain must be non-empty", lineno)
        elif head in ("rel", "letter"):
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_']*)\s*:\s*(.*)", rest)
            if not m:
                raise ModelError(f"expected '{head} <name> : <tuples>'", lineno)
            pending.append((lineno, m.group(1), m.group(2)))
        elif head == "point":
            r = rest.strip()
            if r.startswith("("):
                point = [x.strip() for x in r.strip("()").split(",")]
            else:
                point = [r]
        else:
            raise ModelError(f"unknown directive {head!r}", lineno)
    if worlds is None:
        raise ModelError("missing 'domain' line")
    M = CModel(worlds, {}, name)
    for lineno, g, body in pending:
        if g in M.relations:
            raise ModelError(f"relation {g} defined twice", lineno)
        try:
            M.add_relation(g, _split_tuples(body, lineno))
        except ModelError as e:
            if e.line is None:
                raise ModelError(str(e), lineno) from None
            raise
    if point is not None:
        try:
            M.point = tuple(M._idx(w) for w in point)
        except ModelError as e:
            raise ModelError(f"bad point: {e}") from None
    return M


def load_model(path) -> CModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read(), os.path.splitext(os.path.basename(str(path)))[0])


def format_model(M: CModel, letters: Iterable[str] = ()) -> str:
    """Serialise ``M``; relation names listed in ``letters`` use the ``letter`` keyword."""
    letters = set(letters)
    lines = [f"model {M.name}", "domain " + " ".join(M.worlds)]
    for g in sorted(M.relations):
        rows = sorted(M.relations[g])
        arity = M.arities.get(g, 1)
        if g in letters and arity == 1:
            body = ";".join(M.worlds[t[0]] for t in rows)
            lines.append(f"letter {g} : {body}".rstrip())
        else:
            body = "; ".join("(" + ",".join(M.worlds[i] for i in t) + ")" for t in rows)
            kw = "letter" if g in letters else "rel"
            lines.append(f"{kw} {g} : {body}".rstrip())
    if M.point is not None:
        lines.append("point (" + ",".join(M.worlds[i] for i in M.point) + ")")
    return "\n".join(lines) + "\n"


def require_relations(C: ConnectiveSet, M: CModel):
    """Raise :class:`ModelError` when ``M`` lacks a relation of ``C`` or has a wrong arity."""
    for g, arity in relation_arities(C).items():
        if g not in M.relations:
            raise ModelError(f"model {M.name} has no relation {g!r} (needed by the logic)")
        known = M.arities.get(g)
        if known is not None and known != arity:
            raise ModelError(f"relation {g} of model {M.name} has arity {known}, the logic needs {arity}")
