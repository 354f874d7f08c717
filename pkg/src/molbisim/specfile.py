"""Reader and writer for the line-oriented logic description format.

Example::

    logic modal
    letter p : sign +, quant E, type 1
    conn dia : perm (2,1), sign +, quant E, types (1;1), tonicity (+)
    conn box : perm (2,1), sign -, quant A, types (1;1), tonicity (+)
    share dia box as r
    bool 1

Besides the directives documented in the README, ``conn`` accepts a trailing
``component`` flag for connectives that only serve as building blocks of
``molecular`` definitions, and ``share`` accepts ``as <relation>`` to name
the shared relation symbol (the first member's name is used otherwise).
"""

from __future__ import annotations

import os
import re

from .skeletons import (
    AtomicSkeleton,
    ConnectiveSet,
    IdLeaf,
    LetterLeaf,
    MolecularConnective,
    Permutation,
    SkeletonError,
    Vertex,
    boolean_negation,
    node_str,
    validate_skeleton,
)


class SpecError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


_NAME = r"[A-Za-z_][A-Za-z0-9_']*"


def _parse_fields(body: str, lineno: int) -> tuple[dict[str, str], set[str]]:
    """Split ``key value, key (a,b), flag`` respecting parentheses."""
    parts, depth, cur = [], 0, ""
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    fields, flags = {}, set()
    for part in parts:
        part = part.strip()
        if not part:
            continue
        bits = part.split(None, 1)
        if len(bits) == 1:
            flags.add(bits[0])
        else:
            if bits[0] in fields:
                raise SpecError(f"duplicate field {bits[0]}", lineno)
            fields[bits[0]] = bits[1].strip()
    return fields, flags


def _tuple(text: str, lineno: int, seps=",;") -> list[str]:
    t = text.strip()
    if not (t.startswith("(") and t.endswith(")")):
        raise SpecError(f"expected a parenthesised list, got {text!r}", lineno)
    inner = t[1:-1].strip()
    if not inner:
        return []
    return [x for x in re.split("[" + re.escape(seps) + r"\s]+", inner) if x]


def _ints(text: str, lineno: int) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in _tuple(text, lineno))
    except ValueError:
        raise SpecError(f"expected integers in {text!r}", lineno) from None


def _signs(text: str, lineno: int) -> tuple[str, ...]:
    t = text.strip()
    if not (t.startswith("(") and t.endswith(")")):
        raise SpecError(f"expected a parenthesised sign list, got {text!r}", lineno)
    out = tuple(ch for ch in t[1:-1] if not ch.isspace() and ch not in ",;")
    bad = [s for s in out if s not in "+-"]
    if bad:
        raise SpecError(f"tonicity entries must be + or -, got {''.join(bad)!r}", lineno)
    return out


def _sign(fields, lineno) -> str:
    s = fields.get("sign")
    if s not in ("+", "-"):
        raise SpecError(f"sign must be + or -, got {s!r}", lineno)
    return s


def _quant(fields, lineno) -> str:
    q = fields.get("quant")
    q = {"∀": "A", "∃": "E"}.get(q, q)
    if q not in ("A", "E"):
        raise SpecError(f"quant must be A or E, got {q!r}", lineno)
    return q


class _TreeParser:
    """Recursive descent over ``conn(child, ...)`` expressions."""

    def __init__(self, text, lineno, atomics, letters):
        self.toks = re.findall(r"[A-Za-z_][A-Za-z0-9_']*|[(),\-]|\S", text)
        self.i = 0
        self.lineno = lineno
        self.atomics = atomics
        self.letters = letters

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise SpecError(f"expected {expected or 'a term'} in molecular definition, got {tok!r}", self.lineno)
        self.i += 1
        return tok

    def node(self):
        negated = False
        while self.peek() == "-":
            self.take("-")
            negated = not negated
        name = self.take()
        m = re.fullmatch(r"id(\d+)", name)
        if m:
            if negated:
                raise SpecError("id leaves cannot be negated", self.lineno)
            return IdLeaf(int(m.group(1)))
        if name in self.letters:
            s = self.letters[name]
            if negated:
                return LetterLeaf(name, boolean_negation(s))
            return LetterLeaf(name, s)
        if name not in self.atomics:
            raise SpecError(f"unknown connective {name!r} in molecular definition", self.lineno)
        s = self.atomics[name]
        if negated:
            s = boolean_negation(s)
        if self.peek() == "(":
            self.take("(")
            kids = [self.node()]
            while self.peek() == ",":
                self.take(",")
                kids.append(self.node())
            self.take(")")
        else:
            kids = [IdLeaf(k) for k in s.input_types]
        return Vertex(name, s, tuple(kids), negated)

    def parse(self):
        root = self.node()
        if self.peek() is not None:
            raise SpecError(f"trailing input {self.peek()!r} in molecular definition", self.lineno)
        return root


def parse_spec(text: str, name: str | None = None) -> ConnectiveSet:
    """Parse a logic description into a validated :class:`ConnectiveSet`.

    ``name`` is used when the text has no ``logic`` line.
    """
    letters: dict[str, AtomicSkeleton] = {}
    atomics: dict[str, AtomicSkeleton] = {}
    moleculars: dict[str, MolecularConnective] = {}
    components: set[str] = set()
    booleans: set[tuple[str, int]] = set()
    groups: dict[str, str] = {}
    order: list[str] = []
    logic_name = name

    def declared(nm):
        return nm in letters or nm in atomics or nm in moleculars

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "logic":
            logic_name = rest
        elif head in ("letter", "conn"):
            m = re.fullmatch(rf"({_NAME})\s*:\s*(.*)", rest)
            if not m:
                raise SpecError(f"expected '{head} <name> : <fields>'", lineno)
            nm, body = m.groups()
            if declared(nm):
                raise SpecError(f"duplicate name {nm!r}", lineno)
            fields, flags = _parse_fields(body, lineno)
            if head == "letter":
                unknown = set(fields) - {"sign", "quant", "type", "perm"}
                if unknown or flags:
                    raise SpecError(f"unknown letter field(s): {', '.join(sorted(unknown | flags))}", lineno)
                try:
                    k = int(fields.get("type", "1"))
                except ValueError:
                    raise SpecError(f"type must be an integer, got {fields['type']!r}", lineno) from None
                s = AtomicSkeleton(Permutation((1,)), _sign(fields, lineno), _quant(fields, lineno), (k,), ())
                issues = validate_skeleton(s)
                if issues:
                    raise SpecError(f"letter {nm}: " + "; ".join(issues), lineno)
                letters[nm] = s
            else:
                unknown = (set(fields) - {"perm", "sign", "quant", "types", "tonicity"}) | (flags - {"component"})
                if unknown:
                    raise SpecError(f"unknown connective field(s): {', '.join(sorted(unknown))}", lineno)
                for key in ("perm", "types", "tonicity"):
                    if key not in fields:
                        raise SpecError(f"connective {nm} lacks field {key}", lineno)
                s = AtomicSkeleton(Permutation(_ints(fields["perm"], lineno)), _sign(fields, lineno),
                                   _quant(fields, lineno), _ints(fields["types"], lineno),
                                   _signs(fields["tonicity"], lineno))
                issues = validate_skeleton(s)
                if issues:
                    raise SpecError(f"connective {nm}: " + "; ".join(issues), lineno)
                atomics[nm] = s
                if "component" in flags:
                    components.add(nm)
                else:
                    order.append(nm)
        elif head == "molecular":
            m = re.fullmatch(rf"({_NAME})\s*:=\s*(.+)", rest)
            if not m:
                raise SpecError("expected 'molecular <name> := <tree>'", lineno)
            nm, expr = m.groups()
            if declared(nm):
                raise SpecError(f"duplicate name {nm!r}", lineno)
            root = _TreeParser(expr, lineno, atomics, letters).parse()
            if not isinstance(root, Vertex):
                raise SpecError("a molecular definition must start with a connective", lineno)
            try:
                moleculars[nm] = MolecularConnective(nm, root)
            except SkeletonError as e:
                raise SpecError(str(e), lineno) from None
            order.append(nm)
        elif head == "bool":
            bits = rest.split()
            if not bits or not bits[0].isdigit():
                raise SpecError("expected 'bool <k> [and|or]'", lineno)
            k = int(bits[0])
            kinds = bits[1:] or ["and", "or"]
            for kind in kinds:
                if kind not in ("and", "or"):
                    raise SpecError(f"unknown Boolean connective {kind!r}", lineno)
                booleans.add((kind, k))
        elif head == "share":
            bits = rest.split()
            group = None
            if "as" in bits:
                idx = bits.index("as")
                if idx != len(bits) - 2:
                    raise SpecError("expected 'share <name>+ as <relation>'", lineno)
                group = bits[-1]
                bits = bits[:idx]
            if not bits:
                raise SpecError("share needs at least one name", lineno)
            for b in bits:
                if b not in letters and b not in atomics:
                    raise SpecError(f"share refers to unknown letter or atomic connective {b!r}", lineno)
                if b in groups:
                    raise SpecError(f"{b} is already in a sharing group", lineno)
            group = group or bits[0]
            for b in bits:
                groups[b] = group
        else:
            raise SpecError(f"unknown directive {head!r}", lineno)

    C = ConnectiveSet(letters, atomics, moleculars, frozenset(booleans), groups, tuple(order),
                      frozenset(components), logic_name or "logic")
    problems = C.problems()
    if problems:
        raise SpecError("; ".join(problems))
    return C


def load_spec(path) -> ConnectiveSet:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_spec(text, name=os.path.splitext(os.path.basename(str(path)))[0])


def _tonicity(ton) -> str:
    return "(" + ",".join(ton) + ")"


def format_spec(C: ConnectiveSet) -> str:
    """Serialise ``C`` so that ``parse_spec(format_spec(C))`` rebuilds it."""
    lines = [f"logic {C.name}"]
    for nm, s in C.letters.items():
        lines.append(f"letter {nm} : sign {s.sign}, quant {s.quant}, type {s.output_type}")
    for nm, s in C.atomics.items():
        line = (f"conn {nm} : perm {s.perm}, sign {s.sign}, quant {s.quant}, "
                f"types ({';'.join(map(str, s.types))}), tonicity {_tonicity(s.tonicity)}")
        if nm in C.components:
            line += ", component"
        lines.append(line)
    for nm, mc in C.moleculars.items():
        lines.append(f"molecular {nm} := {node_str(mc.root)}")
    by_group: dict[str, list[str]] = {}
    for nm, g in C.groups.items():
        by_group.setdefault(g, []).append(nm)
    for g, members in by_group.items():
        if len(members) == 1 and members[0] == g:
            continue
        tail = "" if members[0] == g else f" as {g}"
        lines.append("share " + " ".join(members) + tail)
    for k in sorted({k for _, k in C.booleans}):
        kinds = [kind for kind in ("and", "or") if (kind, k) in C.booleans]
        lines.append(f"bool {k}" if len(kinds) == 2 else f"bool {k} {kinds[0]}")
    return "\n".join(lines) + "\n"
