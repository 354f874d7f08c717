"""Ready-made logics and hand-coded reference checkers used as test oracles.

The reference code in this module deliberately shares nothing with
:mod:`molbisim.bisim` or the kernels: it works on Python sets of world
indices and spells every condition out by hand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .bisim import generate_clauses
from .semantics import CModel, is_persistent, is_preorder
from .skeletons import ConnectiveSet
from .specfile import parse_spec
from .syntax import Apply, BoolOp, Formula, Letter

# --------------------------------------------------------------------------
# logic descriptions

_MODAL = """\
logic modal
{letters}
conn dia : perm (2,1), sign +, quant E, types (1;1), tonicity (+)
conn box : perm (2,1), sign -, quant A, types (1;1), tonicity (+)
share dia box as r
{shares}
bool 1
"""

_MODAL_ATOMIC = """\
logic modal-atomic
{letters}
letter top : sign +, quant E, type 1
letter bot : sign -, quant A, type 1
conn conj : perm (1,2,3), sign +, quant E, types (1;1;1), tonicity (+,+)
conn disj : perm (1,2,3), sign -, quant A, types (1;1;1), tonicity (+,+)
conn dia : perm (2,1), sign +, quant E, types (1;1), tonicity (+)
conn box : perm (2,1), sign -, quant A, types (1;1), tonicity (+)
share conj disj as d
share dia box as r
{shares}
"""

_LAMBEK = """\
logic lambek
{letters}
conn o : perm (1,2,3), sign +, quant E, types (1;1;1), tonicity (+,+)
conn under : perm (2,3,1), sign -, quant A, types (1;1;1), tonicity (-,+)
conn over : perm (3,1,2), sign -, quant A, types (1;1;1), tonicity (+,-)
share o under over as r
"""

_INTUITIONISTIC = """\
logic intuitionistic
{letters}
letter top : sign +, quant E, type 1
letter bot : sign -, quant A, type 1
conn imp : perm (2,3,1), sign -, quant A, types (1;1;1), tonicity (-,+)
bool 1
"""

_MODAL_INTUITIONISTIC = """\
logic modal-intuitionistic
{letters}
letter top : sign +, quant E, type 1
letter bot : sign -, quant A, type 1
conn imp : perm (2,3,1), sign -, quant A, types (1;1;1), tonicity (-,+)
conn c1 : perm (2,1), sign -, quant A, types (1;1), tonicity (+), component
conn c2 : perm (2,1), sign -, quant A, types (1;1), tonicity (+), component
conn c3 : perm (2,1), sign +, quant E, types (1;1), tonicity (+), component
share c1 as r
share c2 c3 as rd
molecular box := c1(c2(id1))
molecular ndia := -c1(c3(id1))
bool 1
"""

# the connective whose negation ndia is; not uniform, kept for the classifier
_PRIMED_DIAMOND = "molecular dia := c1(c3(id1))\n"


def _letter_lines(letters, negatives=False):
    lines, shares = [], []
    for p in letters:
        lines.append(f"letter {p} : sign +, quant E, type 1")
        if negatives:
            lines.append(f"letter n{p} : sign -, quant A, type 1")
            shares.append(f"share {p} n{p}")
    return "\n".join(lines), "\n".join(shares)


def spec_text(name: str, letters: Sequence[str] = ("p",), with_primed_diamond: bool = False) -> str:
    """Logic description text of a preset (parseable by :func:`parse_spec`)."""
    if name == "modal":
        body, shares = _letter_lines(letters, negatives=True)
        return _MODAL.format(letters=body, shares=shares).replace("\n\n", "\n")
    if name == "modal-atomic":
        body, shares = _letter_lines(letters, negatives=True)
        return _MODAL_ATOMIC.format(letters=body, shares=shares).replace("\n\n", "\n")
    body, _ = _letter_lines(letters)
    if name == "lambek":
        return _LAMBEK.format(letters=body)
    if name == "intuitionistic":
        return _INTUITIONISTIC.format(letters=body)
    if name == "modal-intuitionistic":
        text = _MODAL_INTUITIONISTIC.format(letters=body)
        return text + _PRIMED_DIAMOND if with_primed_diamond else text
    raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")


PRESET_NAMES = ("modal", "lambek", "intuitionistic", "modal-intuitionistic", "modal-atomic")


# --------------------------------------------------------------------------
# model side conditions

def _pairs(M: CModel, g: str):
    return M.relations.get(g, frozenset())


def _whole_domain(M: CModel, g: str) -> bool:
    return _pairs(M, g) == frozenset((i,) for i in range(M.size))


def validate_modal(M: CModel, letters=("p",)) -> list[str]:
    out = []
    if "r" not in M.relations:
        out.append("missing relation r")
    for p in letters:
        if p not in M.relations:
            out.append(f"missing letter {p}")
    return out


def validate_modal_atomic(M: CModel, letters=("p",)) -> list[str]:
    out = validate_modal(M, letters)
    if _pairs(M, "d") != frozenset((i, i, i) for i in range(M.size)):
        out.append("relation d of conj/disj must be the diagonal {(w,w,w)}")
    for g in ("top", "bot"):
        if not _whole_domain(M, g):
            out.append(f"letter {g} must hold exactly on the whole domain")
    return out


def validate_lambek(M: CModel, letters=("p",)) -> list[str]:
    out = []
    if "r" not in M.relations:
        out.append("missing ternary relation r")
    for p in letters:
        if p not in M.relations:
            out.append(f"missing letter {p}")
    return out


def validate_intuitionistic(M: CModel, letters=("p",), order="r") -> list[str]:
    out = []
    pairs = _pairs(M, order)
    if not is_preorder(M.size, pairs):
        out.append(f"relation {order} is not a preorder")
    for p in letters:
        if not is_persistent(pairs, (t[0] for t in _pairs(M, p))):
            out.append(f"letter {p} is not persistent")
    expected = {(u, v, w) for u in range(M.size) for v in range(M.size) for w in range(M.size)
                if (u, w) in pairs and (v, w) in pairs}
    if set(_pairs(M, "imp")) != expected:
        out.append("relation imp differs from {(u,v,w) : r(u,w) and r(v,w)}")
    for g in ("top", "bot"):
        if not _whole_domain(M, g):
            out.append(f"letter {g} must hold exactly on the whole domain")
    return out


def validate_modal_intuitionistic(M: CModel, letters=("p",)) -> list[str]:
    out = validate_intuitionistic(M, letters)
    if "rd" not in M.relations:
        out.append("missing relation rd")
    return out


# --------------------------------------------------------------------------
# reference bisimulations (set based, written from the textbook clauses)

def _succ(M: CModel, g: str) -> dict[int, set[int]]:
    out: dict[int, set[int]] = {i: set() for i in range(M.size)}
    for a, b in _pairs(M, g):
        out[a].add(b)
    return out


def _valuation(M: CModel, letters) -> list[tuple]:
    return [tuple((w,) in _pairs(M, p) for p in letters) for w in range(M.size)]


def reference_modal_bisim(M1: CModel, M2: CModel, letters=("p",), rel="r") -> set[tuple[int, int]]:
    """Largest modal bisimulation between ``M1`` and ``M2``: atoms, forth and back."""
    v1, v2 = _valuation(M1, letters), _valuation(M2, letters)
    s1, s2 = _succ(M1, rel), _succ(M2, rel)
    Z = {(w, u) for w in range(M1.size) for u in range(M2.size) if v1[w] == v2[u]}
    while True:
        keep = set()
        for w, u in Z:
            forth = all(any((w2, u2) in Z for u2 in s2[u]) for w2 in s1[w])
            back = all(any((w2, u2) in Z for w2 in s1[w]) for u2 in s2[u])
            if forth and back:
                keep.add((w, u))
        if keep == Z:
            return Z
        Z = keep


def reference_directed_bisim(M1: CModel, M2: CModel, letters=("p",), rel="r") -> tuple[set, set]:
    """Largest directed bisimulation for the Lambek connectives.

    Returns ``(forward, backward)`` where ``forward`` relates worlds of
    ``M1`` to worlds of ``M2`` and ``backward`` the other way round.
    Conditions, for ``x Z x'`` with ``Z`` read on the current side:

    * ``p``: ``x`` in ``P`` implies ``x'`` in ``P'``;
    * fusion: ``R y z x`` gives ``y', z'`` with ``y Z y'``, ``z Z z'``, ``R' y' z' x'``;
    * under: ``R' x' y' z'`` gives ``y, z`` with ``y' Z y`` (other side), ``z Z z'``, ``R x y z``;
    * over: ``R' z' x' y'`` gives ``y, z`` with ``y Z y'``, ``z' Z z`` (other side), ``R z x y``.
    """
    models = (M1, M2)
    R = [set(_pairs(M, rel)) for M in models]
    P = [[{w for (w,) in _pairs(M, p)} for p in letters] for M in models]
    W = [range(M.size) for M in models]
    Z = [
        {(x, xp) for x in W[0] for xp in W[1] if all(x not in P[0][i] or xp in P[1][i] for i in range(len(letters)))},
        {(x, xp) for x in W[1] for xp in W[0] if all(x not in P[1][i] or xp in P[0][i] for i in range(len(letters)))},
    ]

    def ok(side, x, xp):
        Rm, Rp = R[side], R[1 - side]
        same, other = Z[side], Z[1 - side]
        for (y, z, w) in Rm:
            if w == x and not any((y, yp) in same and (z, zp) in same and (yp, zp, xp) in Rp
                                  for yp in W[1 - side] for zp in W[1 - side]):
                return False
        for (a, yp, zp) in Rp:
            if a == xp and not any((yp, y) in other and (z, zp) in same and (x, y, z) in Rm
                                   for y in W[side] for z in W[side]):
                return False
        for (zp, a, yp) in Rp:
            if a == xp and not any((y, yp) in same and (zp, z) in other and (z, x, y) in Rm
                                   for y in W[side] for z in W[side]):
                return False
        return True

    while True:
        new = [{(x, xp) for (x, xp) in Z[s] if ok(s, x, xp)} for s in (0, 1)]
        if new == Z:
            return Z[0], Z[1]
        Z = new


# --------------------------------------------------------------------------
# direct Kripke semantics for the intuitionistic presets

def kripke_truth(phi: Formula, M: CModel, order: str = "r", diamond: str = "rd") -> set[int]:
    """Worlds satisfying ``phi`` under the usual (modal) intuitionistic clauses.

    ``imp(a, b)`` holds at ``x`` when every ``y >= x`` satisfying ``a``
    satisfies ``b``; ``box(a)`` when every ``order``-successor's
    ``diamond``-successors satisfy ``a``; ``ndia(a)`` when some
    ``order``-successor has no ``diamond``-successor satisfying ``a``.
    """
    up = _succ(M, order)
    dsucc = _succ(M, diamond) if diamond in M.relations else {}
    W = set(range(M.size))

    def go(f):
        if isinstance(f, Letter):
            if f.name == "top":
                base = set(W)
            elif f.name == "bot":
                base = set()
            else:
                base = {w for (w,) in _pairs(M, f.name)}
            return W - base if f.negated else base
        if isinstance(f, BoolOp):
            a, b = go(f.left), go(f.right)
            return a & b if f.kind == "and" else a | b
        if isinstance(f, Apply):
            args = [go(a) for a in f.args]
            if f.conn == "imp":
                out = {x for x in W if all(y not in args[0] or y in args[1] for y in up[x])}
            elif f.conn == "box":
                out = {x for x in W if all(z in args[0] for y in up[x] for z in dsucc[y])}
            elif f.conn == "ndia":
                out = {x for x in W if any(not (dsucc[y] & args[0]) for y in up[x])}
            elif f.conn == "dia":
                out = {x for x in W if all(dsucc[y] & args[0] for y in up[x])}
            else:
                raise KeyError(f"no direct clause for {f.conn}")
            return W - out if f.negated else out
        raise TypeError(f)

    return go(phi)


# --------------------------------------------------------------------------
# the two conditions compared for intuitionistic models

def unfolded_condition(M: CModel, Mp: CModel, Z: set, Zback: set, order: str = "r") -> bool:
    """For all ``v Z v'`` and ``R' v' w'``, ``R' u' w'`` there are ``u, w`` with
    ``u' Z u``, ``w Z w'``, ``R v w`` and ``R u w``.

    ``Z`` relates ``M`` to ``Mp`` and ``Zback`` relates ``Mp`` to ``M``.
    """
    R, Rp = _pairs(M, order), _pairs(Mp, order)
    for v, vp in Z:
        for (a, wp) in Rp:
            if a != vp:
                continue
            for (up, b) in Rp:
                if b != wp:
                    continue
                if not any((up, u) in Zback and (w, wp) in Z and (v, w) in R and (u, w) in R
                           for u in range(M.size) for w in range(M.size)):
                    return False
    return True


def step_condition(M: CModel, Mp: CModel, Z: set, Zback: set, order: str = "r") -> bool:
    """For all ``v Z v'`` and ``R' v' w'`` there is ``w`` with ``w Z w'``, ``w' Z w`` and ``R v w``."""
    R, Rp = _pairs(M, order), _pairs(Mp, order)
    for v, vp in Z:
        for (a, wp) in Rp:
            if a != vp:
                continue
            if not any((w, wp) in Z and (wp, w) in Zback and (v, w) in R for w in range(M.size)):
                return False
    return True


# --------------------------------------------------------------------------
# alternative clause renderings

def render_unfolded_implication(conn: str = "imp", order: str = "r") -> str:
    """The implication clause with the ternary relation unfolded into two order atoms."""
    return (f"[{conn}/ε] if x Z x' and {order}'(x',z') and {order}'(y',z') "
            f"then exists y,z: y' Z y and z Z z' and {order}(x,z) and {order}(y,z)\n")


def render_swapped_root(C: ConnectiveSet, conn: str, new_name: str) -> str:
    """Clauses of ``conn`` with the root trigger read as ``x' Z x`` and relabelled.

    Applied to the negation of a connective this yields the conditions of
    the connective itself.
    """
    lines = []
    for c in generate_clauses(C):
        if c.conn != conn:
            continue
        text = c.render().replace(f"[{conn}/", f"[{new_name}/").replace(f"Z[{conn}/", f"Z[{new_name}/")
        if c.address == "ε":
            text = text.replace(" if x Z x' and ", " if x' Z x and ", 1)
        lines.append(text)
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# registry

@dataclass(frozen=True)
class Preset:
    name: str
    C: ConnectiveSet
    text: str
    letters: tuple[str, ...]
    validator: Callable[[CModel], list[str]]
    reference: Callable | None = None
    extras: dict = field(default_factory=dict)

    def check_model(self, M: CModel) -> list[str]:
        return self.validator(M)


def preset(name: str, letters: Sequence[str] = ("p",), with_primed_diamond: bool = False) -> Preset:
    """Build one of :data:`PRESET_NAMES` over the given propositional letters."""
    letters = tuple(letters)
    text = spec_text(name, letters, with_primed_diamond)
    C = parse_spec(text)
    if name == "modal":
        return Preset(name, C, text, letters, lambda M: validate_modal(M, letters),
                      lambda M1, M2: reference_modal_bisim(M1, M2, letters))
    if name == "modal-atomic":
        return Preset(name, C, text, letters, lambda M: validate_modal_atomic(M, letters))
    if name == "lambek":
        return Preset(name, C, text, letters, lambda M: validate_lambek(M, letters),
                      lambda M1, M2: reference_directed_bisim(M1, M2, letters))
    if name == "intuitionistic":
        return Preset(name, C, text, letters, lambda M: validate_intuitionistic(M, letters),
                      extras={"unfolded_implication": render_unfolded_implication()})
    if name == "modal-intuitionistic":
        return Preset(name, C, text, letters, lambda M: validate_modal_intuitionistic(M, letters),
                      extras={"unfolded_implication": render_unfolded_implication()})
    raise KeyError(f"unknown preset {name!r}")
