"""Bisimulation clauses derived from skeletons, and the maximal-bisimulation solver.

A family is a dict from relation keys to a pair of boolean matrices, one per
direction: ``fam[key][0]`` relates tuples of ``M1`` to tuples of ``M2`` and
``fam[key][1]`` relates tuples of ``M2`` to tuples of ``M1``.  Tuples of type
``k`` are flattened to row/column indices in ``range(n**k)``.

Relation keys are ``("Z", k)`` for the main relation at type ``k`` and
``(connective, address)`` for the relation attached to a non-root vertex of a
decomposition tree.  The root of every tree and every ``id`` leaf use ``Z``
itself.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .semantics import CModel, Evaluator, flat_index, group_by_size, require_relations
from .skeletons import (
    EXISTS,
    MINUS,
    PLUS,
    ROOT,
    AtomicSkeleton,
    ConnectiveSet,
    IdLeaf,
    LetterLeaf,
    Vertex,
    child_address,
)
from .syntax import Apply, BoolOp, Formula, FormulaError, Letter

FORWARD, BACKWARD = 0, 1
SIDE_NAMES = ("forward", "backward")


def z_key(k: int) -> tuple:
    return ("Z", k)


# --------------------------------------------------------------------------
# clauses

@dataclass(frozen=True)
class Clause:
    """One bisimulation condition.

    ``key`` names the relation whose pairs trigger the clause; ``links[j]``
    names the relation used for argument ``j`` and ``skeleton.tonicity[j]``
    decides whether that link is read in the same or the opposite direction.
    """

    conn: str
    address: str
    skeleton: AtomicSkeleton
    group: str
    key: tuple
    links: tuple[tuple, ...]

    @property
    def label(self) -> str:
        return f"[{self.conn}/{self.address}]"

    @property
    def arity(self) -> int:
        return self.skeleton.arity

    def render(self) -> str:
        return render_clause(self)


@dataclass
class ClauseSet:
    clauses: list[Clause]
    keys: dict[tuple, int]  # relation key -> tuple type

    def render(self) -> str:
        return "\n".join(c.render() for c in self.clauses) + "\n"

    def __iter__(self):
        return iter(self.clauses)

    def __len__(self):
        return len(self.clauses)


def _tree_clauses(C: ConnectiveSet, name: str, root: Vertex, clauses: list, keys: dict):
    def key_of(node, addr):
        if isinstance(node, IdLeaf):
            keys.setdefault(z_key(node.type), node.type)
            return z_key(node.type)
        if addr == ROOT:
            keys.setdefault(z_key(node.output_type), node.output_type)
            return z_key(node.output_type)
        keys[(name, addr)] = node.output_type
        return (name, addr)

    def visit(node, addr):
        if isinstance(node, IdLeaf):
            key_of(node, addr)
            return
        own = key_of(node, addr)
        if isinstance(node, LetterLeaf):
            clauses.append(Clause(name, addr, node.skeleton, C.group(node.name), own, ()))
            return
        links = []
        for j, child in enumerate(node.children, start=1):
            caddr = child_address(addr, j)
            links.append(key_of(child, caddr))
        clauses.append(Clause(name, addr, node.skeleton, C.group(node.conn), own, tuple(links)))
        for j, child in enumerate(node.children, start=1):
            visit(child, child_address(addr, j))

    visit(root, ROOT)


def generate_clauses(C: ConnectiveSet) -> ClauseSet:
    """Letters first, then one clause per vertex of each primitive connective's tree."""
    clauses: list[Clause] = []
    keys: dict[tuple, int] = {}
    for nm, s in C.letters.items():
        k = s.output_type
        keys.setdefault(z_key(k), k)
        clauses.append(Clause(nm, ROOT, s, C.group(nm), z_key(k), ()))
    for nm in C.order:
        _tree_clauses(C, nm, C.tree(nm), clauses, keys)
    return ClauseSet(clauses, keys)


# --------------------------------------------------------------------------
# rendering

_ARG_NAMES = "yzuvwtsrq"


def _block_names(clause: Clause) -> list[str]:
    names = []
    for j, k in enumerate(clause.skeleton.block_sizes()):
        base = "x" if j == clause.arity else _ARG_NAMES[j % len(_ARG_NAMES)] + ("" if j < len(_ARG_NAMES) else str(j))
        names.append(base if k == 1 else "(" + ",".join(f"{base}{i}" for i in range(1, k + 1)) + ")")
    return names


def _prime(block: str) -> str:
    if block.startswith("("):
        return "(" + ",".join(b + "'" for b in block[1:-1].split(",")) + ")"
    return block + "'"


def _rel_name(key: tuple) -> str:
    return "Z" if key[0] == "Z" else f"Z[{key[0]}/{key[1]}]"


def _literal(clause: Clause, blocks: list[str], primed: bool, negate: bool) -> str:
    """``±R^σ`` applied to blocks, optionally under an extra negation."""
    s = clause.skeleton
    inv = s.perm.inverse()
    args = []
    for i in range(1, s.perm.degree + 1):
        b = blocks[inv(i) - 1]
        args.append(b[1:-1] if b.startswith("(") else b)
    name = clause.group + ("'" if primed else "")
    atom = f"{name}({','.join(args)})"
    positive = (s.sign == PLUS) != negate
    return atom if positive else f"not {atom}"


def render_clause(clause: Clause) -> str:
    blocks = _block_names(clause)
    plain = blocks
    primed = [_prime(b) for b in blocks]
    x, xp = plain[-1], primed[-1]
    rel = _rel_name(clause.key)
    exists = clause.skeleton.quant == EXISTS
    if exists:
        trig = _literal(clause, plain, primed=False, negate=False)
        wit = _literal(clause, primed, primed=True, negate=False)
        wvars = primed[:-1]
    else:
        trig = _literal(clause, primed, primed=True, negate=True)
        wit = _literal(clause, plain, primed=False, negate=True)
        wvars = plain[:-1]
    conj = []
    for j, (link, ton) in enumerate(zip(clause.links, clause.skeleton.tonicity)):
        a, b = plain[j], primed[j]
        conj.append(f"{a} {_rel_name(link)} {b}" if ton == PLUS else f"{b} {_rel_name(link)} {a}")
    conj.append(wit)
    head = f"{clause.label} if {x} {rel} {xp} and {trig} then "
    if not wvars:
        return head + " and ".join(conj)
    return head + "exists " + ",".join(wvars) + ": " + " and ".join(conj)


def render_clauses(C: ConnectiveSet) -> str:
    return generate_clauses(C).render()


# --------------------------------------------------------------------------
# families

@dataclass(frozen=True)
class DirectedPair:
    side: int
    left: tuple
    right: tuple

    @property
    def type(self) -> int:
        return len(self.left)


@dataclass
class BisimFamily:
    """Result of :func:`maximal_bisimulation`; matrices per relation key and direction."""

    C: ConnectiveSet
    models: tuple[CModel, CModel]
    relations: dict[tuple, list[np.ndarray]]
    types: dict[tuple, int]
    iterations: int = 0
    trace: list = field(default_factory=list)

    def Z(self, k: int = 1, side: int = FORWARD) -> np.ndarray:
        return self.relations[z_key(k)][side]

    def per_vertex(self) -> dict[tuple, list[np.ndarray]]:
        return {key: v for key, v in self.relations.items() if key[0] != "Z"}

    def pairs(self, key: tuple | None = None) -> set[DirectedPair]:
        """Directed pairs (index tuples) of one relation, ``Z`` at type 1 by default."""
        key = key or z_key(min(k for (h, k) in self.relations if h == "Z"))
        k = self.types[key]
        out = set()
        for side in (FORWARD, BACKWARD):
            src, dst = self.models[side].size, self.models[1 - side].size
            for a, b in zip(*np.nonzero(self.relations[key][side])):
                out.add(DirectedPair(side, np.unravel_index(a, (src,) * k) if k else (),
                                     np.unravel_index(b, (dst,) * k) if k else ()))
        return {DirectedPair(p.side, tuple(int(i) for i in p.left), tuple(int(i) for i in p.right)) for p in out}

    def named_pairs(self, key: tuple | None = None) -> set[tuple[str, tuple, tuple]]:
        out = set()
        for p in self.pairs(key):
            src, dst = self.models[p.side], self.models[1 - p.side]
            out.add((SIDE_NAMES[p.side], src.name_of(p.left), dst.name_of(p.right)))
        return out

    def copy(self) -> "BisimFamily":
        return BisimFamily(self.C, self.models, {k: [m.copy() for m in v] for k, v in self.relations.items()},
                           dict(self.types), self.iterations)

    def size(self) -> int:
        return int(sum(m.sum() for v in self.relations.values() for m in v))

    def same_as(self, other: "BisimFamily") -> bool:
        if set(self.relations) != set(other.relations):
            return False
        return all(np.array_equal(a, b) for key in self.relations
                   for a, b in zip(self.relations[key], other.relations[key]))


def full_family(C: ConnectiveSet, M1: CModel, M2: CModel, clauses: ClauseSet | None = None) -> BisimFamily:
    clauses = clauses or generate_clauses(C)
    rel = {}
    for key, k in clauses.keys.items():
        n1, n2 = M1.size ** k, M2.size ** k
        rel[key] = [np.ones((n1, n2), dtype=bool), np.ones((n2, n1), dtype=bool)]
    return BisimFamily(C, (M1, M2), rel, dict(clauses.keys))


def empty_family(C: ConnectiveSet, M1: CModel, M2: CModel) -> BisimFamily:
    fam = full_family(C, M1, M2)
    for v in fam.relations.values():
        for m in v:
            m[:] = False
    return fam


def _links(clause: Clause, fam_rel, side: int):
    out = []
    for link, ton in zip(clause.links, clause.skeleton.tonicity):
        if ton == PLUS:
            out.append(fam_rel[link][side])
        else:
            out.append(fam_rel[link][1 - side].T)
    return out


def unsupported_pairs(clause: Clause, fam_rel, models, side: int) -> np.ndarray:
    """Pairs of ``clause.key`` on ``side`` that violate ``clause``."""
    M, Mp = models[side], models[1 - side]
    L = M.literal(clause.skeleton, clause.group)
    Lp = Mp.literal(clause.skeleton, clause.group)
    active = fam_rel[clause.key][side]
    if not active.any():
        return np.zeros_like(active)
    if clause.arity == 0:
        # letters: x Z x' and L[x] but not L'[x']  (both quantifier cases agree)
        return active & L[0][:, None] & ~Lp[0][None, :]
    links = _links(clause, fam_rel, side)
    if clause.skeleton.quant == EXISTS:
        return kernels.unsupported(L, Lp, links, active)
    bad_t = kernels.unsupported(~Lp, ~L, [m.T for m in links], np.ascontiguousarray(active.T))
    return bad_t.T


def _containment(fam_rel, types, mode):
    if mode != "all":
        return False
    changed = False
    for key, k in types.items():
        if key[0] == "Z":
            continue
        zk = fam_rel[z_key(k)]
        for side in (FORWARD, BACKWARD):
            extra = zk[side] & ~fam_rel[key][side]
            if extra.any():
                zk[side] &= fam_rel[key][side]
                changed = True
    return changed


ORDERS = ("jacobi", "forward", "reverse")


def maximal_bisimulation(C: ConnectiveSet, M1: CModel, M2: CModel, order: str = "jacobi",
                         containment: str = "roots", record: bool = False,
                         initial: BisimFamily | None = None) -> BisimFamily:
    """Greatest family satisfying every clause, by iterated deletion.

    Refinement starts from the full type-matching family, or from a copy of
    ``initial`` when given (the result is then the greatest bisimulation
    contained in ``initial``).

    ``order`` selects the deletion schedule: ``jacobi`` computes all
    violations against one snapshot and deletes them in a batch; ``forward``
    and ``reverse`` delete immediately while scanning clauses (and sides) in
    the given or reversed order.  All schedules reach the same fixpoint.

    ``containment="all"`` additionally keeps ``Z`` inside the relation of
    every non-root vertex of matching type; the default only identifies the
    root relations with ``Z``.
    """
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    if containment not in ("roots", "all"):
        raise ValueError("containment must be 'roots' or 'all'")
    require_relations(C, M1)
    require_relations(C, M2)
    clauses = generate_clauses(C)
    fam = full_family(C, M1, M2, clauses)
    if initial is not None:
        for key in fam.relations:
            fam.relations[key] = [m.copy() for m in initial.relations[key]]
    rel = fam.relations
    models = (M1, M2)
    schedule = [(c, s) for c in clauses for s in (FORWARD, BACKWARD)]
    if order == "reverse":
        schedule = schedule[::-1]
    changed = True
    rounds = 0
    while changed:
        changed = False
        rounds += 1
        if order == "jacobi":
            found = [(c, s, unsupported_pairs(c, rel, models, s)) for c, s in schedule]
            for c, s, bad in found:
                if bad.any():
                    rel[c.key][s] &= ~bad
                    changed = True
                    if record:
                        fam.trace.append((rounds, c.label, s, int(bad.sum())))
        else:
            for c, s in schedule:
                bad = unsupported_pairs(c, rel, models, s)
                if bad.any():
                    rel[c.key][s] &= ~bad
                    changed = True
                    if record:
                        fam.trace.append((rounds, c.label, s, int(bad.sum())))
        if _containment(rel, fam.types, containment):
            changed = True
    fam.iterations = rounds
    return fam


# --------------------------------------------------------------------------
# independent verification (plain Python over relation tuples)

@dataclass(frozen=True)
class Violation:
    clause: str
    side: int
    pair: tuple
    trigger: tuple
    message: str

    def __str__(self):
        return f"{self.clause} {SIDE_NAMES[self.side]} {self.pair}: {self.message}"


def _signed_holds(M: CModel, clause: Clause, blocks: Sequence[tuple]) -> bool:
    """``±R^σ`` on the given blocks, read straight from the relation's tuple set."""
    s = clause.skeleton
    inv = s.perm.inverse()
    flat = []
    for i in range(1, s.perm.degree + 1):
        flat.extend(blocks[inv(i) - 1])
    member = tuple(flat) in M.relations[clause.group]
    return member if s.sign == PLUS else not member


def _tuples(n: int, k: int):
    return list(itertools.product(range(n), repeat=k))


def verify_family(C: ConnectiveSet, M1: CModel, M2: CModel, fam: BisimFamily,
                  containment: str = "roots", only: Sequence[tuple] | None = None,
                  limit: int | None = None) -> list[Violation]:
    """Check every clause instance directly; returns the violations found.

    ``only`` restricts the trigger pairs to ``(key, side, left, right)``
    entries (index tuples); ``limit`` stops after that many violations.
    """
    clauses = generate_clauses(C)
    models = (M1, M2)
    rel = fam.relations
    for key in clauses.keys:
        if key not in rel:
            raise ValueError(f"family lacks relation {key}")
    out: list[Violation] = []

    def related(key, side, a, b):
        k = clauses.keys[key]
        src, dst = models[side].size, models[1 - side].size
        if len(a) != k or len(b) != k:
            raise ValueError(f"ill-typed pair {a}, {b} for relation {key}")
        return bool(rel[key][side][flat_index(a, src), flat_index(b, dst)])

    def link_ok(key, ton, side, a, b):
        return related(key, side, a, b) if ton == PLUS else related(key, 1 - side, b, a)

    restrict = None
    if only is not None:
        restrict = {}
        for key, side, a, b in only:
            restrict.setdefault((key, side), []).append((tuple(a), tuple(b)))

    for clause in clauses:
        s = clause.skeleton
        k = s.output_type
        for side in (FORWARD, BACKWARD):
            M, Mp = models[side], models[1 - side]
            if restrict is not None:
                pairs = restrict.get((clause.key, side), [])
            else:
                pairs = [(a, b) for a in _tuples(M.size, k) for b in _tuples(Mp.size, k)
                         if related(clause.key, side, a, b)]
            arg_m = [_tuples(M.size, kj) for kj in s.input_types]
            arg_mp = [_tuples(Mp.size, kj) for kj in s.input_types]
            for a, b in pairs:
                if s.quant == EXISTS:
                    for xs in itertools.product(*arg_m):
                        if not _signed_holds(M, clause, list(xs) + [a]):
                            continue
                        ok = any(
                            _signed_holds(Mp, clause, list(ys) + [b])
                            and all(link_ok(lk, t, side, xj, yj)
                                    for lk, t, xj, yj in zip(clause.links, s.tonicity, xs, ys))
                            for ys in itertools.product(*arg_mp))
                        if not ok:
                            out.append(Violation(clause.label, side, (a, b), tuple(xs),
                                                 f"trigger {tuple(xs)} has no witness in {Mp.name}"))
                            break
                else:
                    for ys in itertools.product(*arg_mp):
                        if _signed_holds(Mp, clause, list(ys) + [b]):
                            continue
                        ok = any(
                            not _signed_holds(M, clause, list(xs) + [a])
                            and all(link_ok(lk, t, side, xj, yj)
                                    for lk, t, xj, yj in zip(clause.links, s.tonicity, xs, ys))
                            for xs in itertools.product(*arg_m))
                        if not ok:
                            out.append(Violation(clause.label, side, (a, b), tuple(ys),
                                                 f"trigger {tuple(ys)} has no witness in {M.name}"))
                            break
                if limit is not None and len(out) >= limit:
                    return out
    if containment == "all" and only is None:
        for key, k in clauses.keys.items():
            if key[0] == "Z":
                continue
            for side in (FORWARD, BACKWARD):
                extra = rel[z_key(k)][side] & ~rel[key][side]
                for a, b in zip(*np.nonzero(extra)):
                    out.append(Violation(f"[{key[0]}/{key[1]}]", side, (int(a), int(b)), (),
                                         "pair of Z missing from the vertex relation"))
    return out


# --------------------------------------------------------------------------
# pointed queries and preservation

def bisimilar(C: ConnectiveSet, M1: CModel, w1, M2: CModel, w2, fam: BisimFamily | None = None) -> bool:
    w1 = tuple(w1) if isinstance(w1, (tuple, list)) else (w1,)
    w2 = tuple(w2) if isinstance(w2, (tuple, list)) else (w2,)
    if len(w1) != len(w2):
        raise ValueError(f"points have different types {len(w1)} and {len(w2)}")
    a = tuple(M1._idx(w) for w in w1)
    b = tuple(M2._idx(w) for w in w2)
    fam = fam or maximal_bisimulation(C, M1, M2)
    key = z_key(len(a))
    if key not in fam.relations:
        return False
    return bool(fam.relations[key][FORWARD][flat_index(a, M1.size), flat_index(b, M2.size)])


@dataclass
class PreservationResult:
    ok: bool
    formula: Formula | None = None
    pair: tuple | None = None

    def __bool__(self):
        return self.ok


def preserves(C: ConnectiveSet, M1: CModel, w1, M2: CModel, w2, depth: int,
              letters: Sequence[str] | None = None) -> PreservationResult:
    """Every enumerated formula true at ``(M1, w1)`` is true at ``(M2, w2)``."""
    w1 = tuple(w1) if isinstance(w1, (tuple, list)) else (w1,)
    w2 = tuple(w2) if isinstance(w2, (tuple, list)) else (w2,)
    a = flat_index([M1._idx(w) for w in w1], M1.size)
    b = flat_index([M2._idx(w) for w in w2], M2.size)
    # one formula per joint denotation, shallowest first
    fs, (D1, D2) = distinct_denotations(C, [M1, M2], depth, letters, len(w1))
    bad = np.flatnonzero(D1[:, a] & ~D2[:, b])
    if len(bad):
        return PreservationResult(False, fs[int(bad[0])], (w1, w2))
    return PreservationResult(True)


def batch_denotations(C: ConnectiveSet, models: Sequence[CModel], formulas: Sequence[Formula]) -> list[np.ndarray]:
    """Per model, the ``(F, n**k)`` stack of denotations of ``formulas`` (all of one type ``k``).

    Models of equal size are evaluated together in one batch.
    """
    out: list = [None] * len(models)
    for _, idx in group_by_size(models).items():
        ev = Evaluator(C, [models[i] for i in idx])
        if formulas:
            D = np.stack([ev.denote(f) for f in formulas], axis=1)
        else:
            D = np.zeros((len(idx), 0, ev.n), dtype=bool)
        for j, i in enumerate(idx):
            out[i] = D[j]
    return out


def distinct_denotations(C: ConnectiveSet, models: Sequence[CModel], depth: int,
                         letters: Sequence[str] | None = None, k: int = 1):
    """Representatives of the distinct joint denotations of depth-bounded formulas.

    Builds formulas level by level with the same grammar as
    :func:`enumerate_by_depth`, but keeps one formula per denotation taken
    jointly over all of ``models``.  Since the denotation of an application
    only depends on the denotations of its arguments in the same model, the
    set of joint denotations reached equals that of the full enumeration,
    so preservation checks over these representatives are exact.

    Returns ``(formulas, stacks)`` where ``formulas`` are the type-``k``
    representatives and ``stacks[i]`` is their ``(F, n**k)`` denotation
    stack in ``models[i]``.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    names = list(C.letters) if letters is None else list(letters)
    for nm in names:
        if nm not in C.letters:
            raise FormulaError(f"unknown letter {nm!r}")
    groups = list(group_by_size(models).items())
    evs = [Evaluator(C, [models[i] for i in idx]) for _, idx in groups]
    seen: set = set()
    dens: dict[int, list[np.ndarray]] = {}
    reps: dict[int, list[Formula]] = {}
    fresh: dict[int, list[Formula]] = {}

    def admit(f, parts, bucket):
        key = (f.type,) + tuple(np.packbits(a).tobytes() for a in parts)
        if key in seen:
            return
        seen.add(key)
        dens[id(f)] = parts
        bucket.setdefault(f.type, []).append(f)

    for nm in names:
        f = Letter(nm, C.letters[nm].output_type)
        admit(f, [ev.denote(f) for ev in evs], fresh)
    bool_kinds = sorted(C.booleans, key=lambda kk: (kk[1], kk[0] != "and"))
    sigs = [(nm, C.connective(nm).input_types, C.connective(nm).output_type) for nm in C.order]
    for _ in range(depth):
        for t, fs in fresh.items():
            reps.setdefault(t, []).extend(fs)
        new_ids = {id(f) for fs in fresh.values() for f in fs}
        level: dict[int, list[Formula]] = {}
        for kind, t in bool_kinds:
            pool = reps.get(t, [])
            for a, b in itertools.product(pool, repeat=2):
                if id(a) in new_ids or id(b) in new_ids:
                    da, db = dens[id(a)], dens[id(b)]
                    parts = [x & y if kind == "and" else x | y for x, y in zip(da, db)]
                    admit(BoolOp(kind, a, b), parts, level)
        for nm, inputs, out in sigs:
            if not inputs:
                continue
            tree = C.tree(nm, False)
            pools = [reps.get(t, []) for t in inputs]
            for args in itertools.product(*pools):
                if not any(id(a) in new_ids for a in args):
                    continue
                parts = [ev.apply_tree(tree, [dens[id(a)][g] for a in args]) for g, ev in enumerate(evs)]
                admit(Apply(nm, args, out), parts, level)
        fresh = level
    for t, fs in fresh.items():
        reps.setdefault(t, []).extend(fs)
    formulas = reps.get(k, [])
    stacks: list = [None] * len(models)
    for g, (ev, (_, idx)) in enumerate(zip(evs, groups)):
        if formulas:
            D = np.stack([dens[id(f)][g] for f in formulas], axis=1)
        else:
            D = np.zeros((len(idx), 0, ev.n ** k), dtype=bool)
        for j, i in enumerate(idx):
            stacks[i] = D[j]
    return formulas, stacks


def family_preserves(fam: BisimFamily, D1: np.ndarray, D2: np.ndarray,
                     formulas: Sequence[Formula] | None = None, k: int = 1) -> PreservationResult:
    """Check every type-``k`` pair of ``fam`` against precomputed denotation stacks.

    ``D1``/``D2`` come from :func:`batch_denotations` for the two models of
    the family.  A pair ``x Z x'`` fails when a formula holds at ``x`` but not
    at ``x'``.
    """
    dens = (D1, D2)
    for side in (FORWARD, BACKWARD):
        Z = fam.relations[z_key(k)][side]
        bad = Z & preservation_matrix(dens[side], dens[1 - side])
        if bad.any():
            a, b = (int(i) for i in np.argwhere(bad)[0])
            f = int(np.flatnonzero(dens[side][:, a] & ~dens[1 - side][:, b])[0])
            return PreservationResult(False, formulas[f] if formulas is not None else None, (side, a, b))
    return PreservationResult(True)


def subtree_denotations(ev: Evaluator, node, arg_sets: Sequence[np.ndarray]) -> np.ndarray:
    """Denotations of ``node(phi_1..phi_n)`` for every argument combination.

    ``arg_sets[j]`` is a ``(F_j, n**k_j)`` stack of argument denotations for
    a single model; the result is ``(prod F_j, n**k)``.
    """
    n_ids = len(arg_sets)
    if n_ids == 0:
        return ev.apply_tree(node, [])
    combos = list(itertools.product(*[range(a.shape[0]) for a in arg_sets]))
    # evaluate all combinations as one batch by tiling the single model
    batch = Evaluator(ev.C, ev.models * len(combos)) if ev.B == 1 else None
    if batch is None:
        raise ValueError("subtree_denotations expects a single-model evaluator")
    args = [np.stack([arg_sets[j][c[j]] for c in combos]) for j in range(n_ids)]
    return batch.apply_tree(node, args)


def per_vertex_preserves(C: ConnectiveSet, conn: str, address: str, M1: CModel, M2: CModel,
                         pairs: Sequence[tuple[int, tuple, tuple]], depth: int,
                         letters: Sequence[str] | None = None,
                         language: tuple | None = None) -> PreservationResult:
    """Preservation of the language headed by the subconnective at ``address``.

    ``pairs`` holds ``(side, left, right)`` index tuples.  For an internal
    vertex of arity ``n`` the language is ``c(phi_1..phi_n)`` with arguments
    of depth at most ``depth - 1``; a letter vertex gives ``{p}`` and an
    ``id`` vertex the whole language up to ``depth``.  Formulas with the
    same denotation in both models are checked once.  ``language`` may hold
    precomputed ``(D1, D2)`` denotation stacks of that whole language (type
    of the id leaf) in ``M1`` and ``M2``.
    """
    root = C.tree(conn)
    node = root
    if address != ROOT:
        for step in address.split("."):
            node = node.children[int(step) - 1]
    models = (M1, M2)
    if isinstance(node, IdLeaf):
        if language is None:
            language = tuple(distinct_denotations(C, [M1, M2], depth, letters, node.type)[1])
        for side, a, b in pairs:
            ia = flat_index(a, models[side].size)
            ib = flat_index(b, models[1 - side].size)
            if (language[side][:, ia] & ~language[1 - side][:, ib]).any():
                return PreservationResult(False, None, (a, b))
        return PreservationResult(True)
    if isinstance(node, LetterLeaf):
        evs = [Evaluator(C, [m]) for m in models]
        dens = [ev.letter(node.name, node.skeleton)[0] for ev in evs]
        for side, a, b in pairs:
            if dens[side][flat_index(a, models[side].size)] and not dens[1 - side][flat_index(b, models[1 - side].size)]:
                return PreservationResult(False, None, (a, b))
        return PreservationResult(True)
    # arguments range over one representative per joint denotation in M1, M2
    pools = {k: distinct_denotations(C, [M1, M2], max(depth - 1, 0), letters, k)[1]
             for k in set(_id_types(node))}
    evs = [Evaluator(C, [m]) for m in models]
    dens = []
    for i, ev in enumerate(evs):
        arg_sets = []
        for k in _id_types(node):
            D = pools[k][i]
            arg_sets.append(D if D.shape[0] else np.zeros((0, ev.n ** k), bool))
        dens.append(subtree_denotations(ev, node, arg_sets))
    for side, a, b in pairs:
        ia = flat_index(a, models[side].size)
        ib = flat_index(b, models[1 - side].size)
        bad = dens[side][:, ia] & ~dens[1 - side][:, ib]
        if bad.any():
            return PreservationResult(False, None, (a, b))
    return PreservationResult(True)


def _id_types(node) -> list[int]:
    if isinstance(node, IdLeaf):
        return [node.type]
    if isinstance(node, LetterLeaf):
        return []
    out = []
    for c in node.children:
        out.extend(_id_types(c))
    return out


def preservation_matrix(D1: np.ndarray, D2: np.ndarray) -> np.ndarray:
    """``V[x, x']`` is set when some formula holds at ``x`` in ``D1`` but fails at ``x'``.

    ``D1`` and ``D2`` are ``(F, N1)`` and ``(F, N2)`` stacks of denotations of
    the same formulas.
    """
    return (D1.T.astype(np.float32) @ (~D2).astype(np.float32)) > 0
