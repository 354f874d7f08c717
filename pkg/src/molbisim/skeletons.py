"""Atomic and molecular connective skeletons.

An atomic skeleton ``(perm, sign, quant, types, tonicity)`` fixes the truth
condition of one connective::

    quant x1..xn ( x1 (+/-)in W1  op ... op  xn (+/-)in Wn  op  sign R(blocks permuted) )

where ``op`` is a conjunction for ``E`` and a disjunction for ``A``.  Molecular
connectives are trees of atomic skeletons whose leaves are ``id_k``
placeholders or propositional letters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence


class SkeletonError(ValueError):
    """Raised for malformed skeletons, trees or connective sets."""


PLUS, MINUS = "+", "-"
FORALL, EXISTS = "A", "E"

_QUANT_SYMBOL = {FORALL: "∀", EXISTS: "∃"}


def flip_sign(s: str) -> str:
    return MINUS if s == PLUS else PLUS


def flip_quant(q: str) -> str:
    return EXISTS if q == FORALL else FORALL


# --------------------------------------------------------------------------
# permutations

@dataclass(frozen=True)
class Permutation:
    """A permutation of ``{1..n}`` given by its images, ``mapping[i-1] = sigma(i)``."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(int(i) for i in self.mapping))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @property
    def degree(self) -> int:
        return len(self.mapping)

    def is_bijection(self) -> bool:
        return sorted(self.mapping) == list(range(1, self.degree + 1))

    def __call__(self, i: int) -> int:
        return self.mapping[i - 1]

    def inverse(self) -> "Permutation":
        if not self.is_bijection():
            raise SkeletonError(f"{self} is not a bijection")
        inv = [0] * self.degree
        for i, image in enumerate(self.mapping, start=1):
            inv[image - 1] = i
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """``(self o other)(i) = self(other(i))``."""
        if other.degree != self.degree:
            raise SkeletonError("cannot compose permutations of different degree")
        return Permutation(tuple(self(other(i)) for i in range(1, self.degree + 1)))

    def __str__(self):
        return "(" + ",".join(map(str, self.mapping)) + ")"


# --------------------------------------------------------------------------
# atomic skeletons

@dataclass(frozen=True)
class AtomicSkeleton:
    perm: Permutation
    sign: str
    quant: str
    types: tuple[int, ...]  # (k, k1, ..., kn)
    tonicity: tuple[str, ...] = ()

    def __post_init__(self):
        if not isinstance(self.perm, Permutation):
            object.__setattr__(self, "perm", Permutation(tuple(self.perm)))
        object.__setattr__(self, "types", tuple(int(k) for k in self.types))
        object.__setattr__(self, "tonicity", tuple(self.tonicity))

    @classmethod
    def letter(cls, sign: str = PLUS, quant: str = EXISTS, k: int = 1) -> "AtomicSkeleton":
        return cls(Permutation.identity(1), sign, quant, (k,), ())

    @property
    def arity(self) -> int:
        return len(self.tonicity)

    @property
    def is_letter(self) -> bool:
        return self.arity == 0

    @property
    def output_type(self) -> int:
        return self.types[0]

    @property
    def input_types(self) -> tuple[int, ...]:
        return self.types[1:]

    def block_sizes(self) -> tuple[int, ...]:
        """Sizes of blocks x1..xn followed by the point block x_{n+1}."""
        return self.input_types + (self.output_type,)

    def relation_layout(self) -> tuple[int, ...]:
        """Block sizes in the order they occur inside the relation tuple.

        Position ``i`` of ``R`` holds block ``perm^-1(i)``.
        """
        inv = self.perm.inverse()
        blocks = self.block_sizes()
        return tuple(blocks[inv(i) - 1] for i in range(1, self.perm.degree + 1))

    @property
    def relation_arity(self) -> int:
        return sum(self.types)

    def negated(self) -> "AtomicSkeleton":
        return boolean_negation(self)

    def signature_str(self) -> str:
        ks = ",".join(map(str, self.types))
        if self.is_letter:
            return f"({self.perm},{self.sign},{_QUANT_SYMBOL.get(self.quant, self.quant)},{ks})"
        ton = ",".join(self.tonicity)
        return f"({self.perm},{self.sign},{_QUANT_SYMBOL.get(self.quant, self.quant)},({ks}),({ton}))"

    __str__ = signature_str


def validate_skeleton(s: AtomicSkeleton) -> list[str]:
    """Return the list of violated skeleton invariants (empty when valid)."""
    problems = []
    n = s.arity
    if s.sign not in (PLUS, MINUS):
        problems.append(f"sign must be + or -, got {s.sign!r}")
    if s.quant not in (FORALL, EXISTS):
        problems.append(f"quantifier must be A or E, got {s.quant!r}")
    for t in s.tonicity:
        if t not in (PLUS, MINUS):
            problems.append(f"tonicity entries must be + or -, got {t!r}")
            break
    if len(s.types) != n + 1:
        problems.append(f"type signature has {len(s.types)} entries, arity {n} needs {n + 1}")
    if any(k < 1 for k in s.types):
        problems.append(f"types must be positive integers, got {s.types}")
    if s.perm.degree != n + 1:
        problems.append(f"permutation {s.perm} has degree {s.perm.degree}, arity {n} needs degree {n + 1}")
    if not s.perm.is_bijection():
        problems.append(f"permutation {s.perm} is not a bijection on 1..{s.perm.degree}")
    return problems


def boolean_negation(s: AtomicSkeleton) -> AtomicSkeleton:
    return AtomicSkeleton(
        s.perm,
        flip_sign(s.sign),
        flip_quant(s.quant),
        s.types,
        tuple(flip_sign(t) for t in s.tonicity),
    )


# --------------------------------------------------------------------------
# molecular connectives

@dataclass(frozen=True)
class IdLeaf:
    type: int

    @property
    def output_type(self) -> int:
        return self.type

    def label(self) -> str:
        return f"id{self.type}"


@dataclass(frozen=True)
class LetterLeaf:
    name: str
    skeleton: AtomicSkeleton

    @property
    def output_type(self) -> int:
        return self.skeleton.output_type

    def label(self) -> str:
        return self.name


@dataclass(frozen=True)
class Vertex:
    """Internal vertex of a decomposition tree.

    ``conn`` names the atomic connective whose relation the vertex uses;
    ``negated`` marks that its skeleton is the Boolean negation of that
    connective's declared skeleton.
    """

    conn: str
    skeleton: AtomicSkeleton
    children: tuple["Node", ...]
    negated: bool = False

    @property
    def output_type(self) -> int:
        return self.skeleton.output_type

    def label(self) -> str:
        return ("-" if self.negated else "") + self.conn


Node = "IdLeaf | LetterLeaf | Vertex"


def node_arity(node) -> int:
    if isinstance(node, IdLeaf):
        return 1
    if isinstance(node, LetterLeaf):
        return 0
    return sum(node_arity(c) for c in node.children)


def node_input_types(node) -> tuple[int, ...]:
    if isinstance(node, IdLeaf):
        return (node.type,)
    if isinstance(node, LetterLeaf):
        return ()
    out: tuple[int, ...] = ()
    for c in node.children:
        out += node_input_types(c)
    return out


def node_quant(node) -> str | None:
    if isinstance(node, IdLeaf):
        return None
    return node.skeleton.quant


def node_str(node) -> str:
    if isinstance(node, Vertex):
        return node.label() + "(" + ", ".join(node_str(c) for c in node.children) + ")"
    return node.label()


def check_node(node, path: str = "ε") -> list[str]:
    """Structural problems of a tree (child counts and type agreement)."""
    problems = []
    if isinstance(node, Vertex):
        s = node.skeleton
        if len(node.children) != s.arity:
            problems.append(f"vertex {path} ({node.label()}) has {len(node.children)} children, arity is {s.arity}")
        for j, (child, k) in enumerate(zip(node.children, s.input_types), start=1):
            if child.output_type != k:
                problems.append(
                    f"vertex {child_address(path, j)} has output type {child.output_type}, "
                    f"{node.label()} expects input type {k}")
            problems.extend(check_node(child, child_address(path, j)))
    elif isinstance(node, IdLeaf) and node.type < 1:
        problems.append(f"id leaf at {path} has non-positive type {node.type}")
    return problems


ROOT = "ε"


def child_address(path: str, j: int) -> str:
    return str(j) if path == ROOT else f"{path}.{j}"


@dataclass(frozen=True)
class MolecularConnective:
    name: str
    root: Vertex

    def __post_init__(self):
        if not isinstance(self.root, Vertex):
            raise SkeletonError(f"molecular connective {self.name} must have an atomic skeleton at its root")
        problems = check_node(self.root)
        if problems:
            raise SkeletonError(f"molecular connective {self.name}: " + "; ".join(problems))

    @property
    def arity(self) -> int:
        return node_arity(self.root)

    @property
    def output_type(self) -> int:
        return self.root.output_type

    @property
    def input_types(self) -> tuple[int, ...]:
        return node_input_types(self.root)

    @property
    def types(self) -> tuple[int, ...]:
        return (self.output_type,) + self.input_types

    @property
    def quant(self) -> str:
        return self.root.skeleton.quant

    def vertices(self) -> list[tuple[str, object]]:
        """All vertices in preorder with their path addresses."""
        return list(_walk(self.root, ROOT))

    def vertex(self, address: str):
        for addr, node in _walk(self.root, ROOT):
            if addr == address:
                return node
        raise KeyError(address)

    def negated(self, name: str | None = None) -> "MolecularConnective":
        r = self.root
        return MolecularConnective(name or f"-{self.name}",
                                   Vertex(r.conn, boolean_negation(r.skeleton), r.children, not r.negated))

    def __str__(self):
        return node_str(self.root)


def _walk(node, path) -> Iterator[tuple[str, object]]:
    yield path, node
    if isinstance(node, Vertex):
        for j, c in enumerate(node.children, start=1):
            yield from _walk(c, child_address(path, j))


def atomic_tree(conn: str, s: AtomicSkeleton, negated: bool = False) -> Vertex:
    """Decomposition tree of a lone atomic connective: root with ``id`` leaves."""
    return Vertex(conn, s, tuple(IdLeaf(k) for k in s.input_types), negated)


def decomposition_tree(c) -> list[tuple[str, str]]:
    """``(address, label)`` for every vertex of the decomposition tree, preorder."""
    root = c.root if isinstance(c, MolecularConnective) else c
    return [(addr, node.label()) for addr, node in _walk(root, ROOT)]


def is_uniform(c: MolecularConnective) -> tuple[bool, str | None]:
    """Classify ``c``; returns ``(True, None)`` or ``(False, reason)``.

    Clause 2 is checked against the root's children (a child under a
    ``+`` argument must be universal, under ``-`` existential); clause 3 is
    the same alternation law for every non-root internal vertex, relative to
    that vertex's own quantifier.  ``id`` leaves carry no quantifier and are
    skipped; letter leaves are checked like any other child.
    """
    root = c.root
    n = root.skeleton.arity
    if n < 1:
        return False, "clause 1: root has arity 0"
    for j, child in enumerate(root.children, start=1):
        if node_arity(child) != 1:
            return False, f"clause 1: argument {j} has arity {node_arity(child)}, expected 1"
    for j, (child, ton) in enumerate(zip(root.children, root.skeleton.tonicity), start=1):
        q = node_quant(child)
        if q is None:
            continue
        want = FORALL if ton == PLUS else EXISTS
        if q != want:
            return False, f"clause 2: argument {j} ({child.label()}) is {q}, tonicity {ton} needs {want}"
    for addr, node in c.vertices():
        if addr == ROOT or not isinstance(node, Vertex):
            continue
        q0 = node.skeleton.quant
        for i, (child, ton) in enumerate(zip(node.children, node.skeleton.tonicity), start=1):
            q = node_quant(child)
            if q is None:
                continue
            want = q0 if ton == PLUS else flip_quant(q0)
            if q != want:
                return False, (f"clause 3: vertex {child_address(addr, i)} ({child.label()}) is {q}, "
                               f"expected {want} under {node.label()}")
    return True, None


# --------------------------------------------------------------------------
# connective sets

BOOL_KINDS = ("and", "or")
BOOL_SYMBOL = {"and": "&", "or": "|"}


@dataclass(frozen=True)
class ConnectiveSet:
    """A declared logic: letters, atomic and molecular connectives, Booleans.

    ``order`` lists the primitive (non-letter, non-Boolean) connectives in
    declaration order; ``components`` are atomic connectives that only occur
    inside molecular definitions and are not primitives of the language.
    ``groups`` maps every letter and atomic connective to the name of the
    relation symbol it is interpreted by.
    """

    letters: Mapping[str, AtomicSkeleton]
    atomics: Mapping[str, AtomicSkeleton] = field(default_factory=dict)
    moleculars: Mapping[str, MolecularConnective] = field(default_factory=dict)
    booleans: frozenset = frozenset()
    groups: Mapping[str, str] = field(default_factory=dict)
    order: tuple[str, ...] = ()
    components: frozenset = frozenset()
    name: str = "logic"

    def __post_init__(self):
        groups = dict(self.groups)
        for nm in list(self.letters) + list(self.atomics):
            groups.setdefault(nm, nm)
        object.__setattr__(self, "groups", groups)
        if not self.order:
            object.__setattr__(self, "order", tuple(
                [a for a in self.atomics if a not in self.components] + list(self.moleculars)))
        object.__setattr__(self, "booleans", frozenset(self.booleans))
        object.__setattr__(self, "components", frozenset(self.components))

    # lookups ---------------------------------------------------------------
    def group(self, name: str) -> str:
        return self.groups[name]

    def group_members(self, group: str) -> list[str]:
        return [n for n, g in self.groups.items() if g == group]

    def is_letter(self, name: str) -> bool:
        return name in self.letters

    def is_primitive(self, name: str) -> bool:
        return name in self.order

    def connective(self, name: str):
        """Skeleton (atomic) or MolecularConnective for a primitive name."""
        if name in self.moleculars:
            return self.moleculars[name]
        if name in self.atomics:
            return self.atomics[name]
        if name in self.letters:
            return self.letters[name]
        raise KeyError(name)

    def tree(self, name: str, negated: bool = False) -> Vertex:
        """Decomposition tree root for a primitive connective."""
        if name in self.moleculars:
            root = self.moleculars[name].root
            if negated:
                root = Vertex(root.conn, boolean_negation(root.skeleton), root.children, not root.negated)
            return root
        s = self.atomics[name]
        return atomic_tree(name, boolean_negation(s) if negated else s, negated)

    def signature(self, name: str) -> tuple[int, ...]:
        """Type signature ``(k, k1..kn)`` of a primitive connective or letter."""
        c = self.connective(name)
        return c.types

    def arity(self, name: str) -> int:
        c = self.connective(name)
        return c.arity

    def trees(self) -> list[tuple[str, Vertex]]:
        return [(nm, self.tree(nm)) for nm in self.order]

    def types(self) -> list[int]:
        """Every type occurring in the associated atomic connectives, sorted."""
        ks = set()
        for s in associated_atomics(self).values():
            ks.update(s.types)
        return sorted(ks)

    def with_booleans(self, booleans) -> "ConnectiveSet":
        return ConnectiveSet(self.letters, self.atomics, self.moleculars, frozenset(booleans),
                             self.groups, self.order, self.components, self.name)

    def problems(self) -> list[str]:
        out = []
        if not self.letters:
            out.append("a connective set needs at least one propositional letter")
        names = list(self.letters) + list(self.atomics) + list(self.moleculars)
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            out.append("duplicate names: " + ", ".join(dupes))
        for nm, s in list(self.letters.items()) + list(self.atomics.items()):
            for p in validate_skeleton(s):
                out.append(f"{nm}: {p}")
            if nm in self.letters and not s.is_letter:
                out.append(f"{nm}: letters must have arity 0")
        for nm in self.order:
            if nm not in self.atomics and nm not in self.moleculars:
                out.append(f"unknown connective {nm} in declaration order")
        layouts: dict[str, tuple[str, tuple[int, ...]]] = {}
        for nm, s in list(self.letters.items()) + list(self.atomics.items()):
            if validate_skeleton(s):
                continue
            g = self.groups[nm]
            lay = s.relation_layout()
            if g in layouts and layouts[g][1] != lay:
                other, olay = layouts[g]
                out.append(f"relation {g}: {nm} uses block layout {lay} but {other} uses {olay}")
            layouts.setdefault(g, (nm, lay))
        return out

    def validate(self) -> "ConnectiveSet":
        p = self.problems()
        if p:
            raise SkeletonError("; ".join(p))
        return self


def associated_atomics(C: ConnectiveSet) -> dict[str, AtomicSkeleton]:
    """Atomic skeletons labelling the decomposition trees of ``C``, plus its letters.

    Keys are connective names; a negated vertex contributes ``-name``.
    """
    out: dict[str, AtomicSkeleton] = {}
    for nm, s in C.letters.items():
        out[nm] = s
    for nm in C.order:
        if nm in C.atomics:
            out[nm] = C.atomics[nm]
            continue
        for _, node in C.moleculars[nm].vertices():
            if isinstance(node, Vertex):
                out[node.label()] = node.skeleton
            elif isinstance(node, LetterLeaf):
                out[node.name] = node.skeleton
    return out


def is_complete_for_conj_disj(C: ConnectiveSet) -> tuple[bool, list[tuple[str, int]]]:
    missing = []
    for k in C.types():
        for kind in BOOL_KINDS:
            if (kind, k) not in C.booleans:
                missing.append((kind, k))
    return not missing, missing


def format_bool(kind: str, k: int) -> str:
    return ("∧" if kind == "and" else "∨") + f"_{k}"


def uniformity_table(C: ConnectiveSet) -> list[tuple[str, bool, str | None]]:
    """``(name, uniform, reason)`` for every primitive connective of ``C``."""
    rows = []
    for nm in C.order:
        if nm in C.moleculars:
            mc = C.moleculars[nm]
        else:
            mc = MolecularConnective(nm, C.tree(nm))
        ok, why = is_uniform(mc)
        rows.append((nm, ok, why))
    return rows


def relation_arities(C: ConnectiveSet) -> dict[str, int]:
    out = {}
    for nm, s in list(C.letters.items()) + list(C.atomics.items()):
        out[C.groups[nm]] = s.relation_arity
    return out


def build_set(letters: Sequence[tuple[str, AtomicSkeleton]], atomics=(), moleculars=(),
              booleans=(), shares: Sequence[Sequence[str]] = (), name="logic") -> ConnectiveSet:
    """Convenience constructor used by tests and presets."""
    groups = {}
    for members in shares:
        for m in members:
            groups[m] = members[0]
    return ConnectiveSet(dict(letters), dict(atomics), {m.name: m for m in moleculars},
                         frozenset(booleans), groups, name=name)
