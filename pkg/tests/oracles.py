"""Brute-force reference semantics used by the tests.

Everything here works on plain Python sets of index tuples and follows the
truth conditions literally, sharing no code with the vectorised evaluator.
"""

import itertools

from molbisim.skeletons import IdLeaf, LetterLeaf
from molbisim.syntax import Apply, BoolOp, Letter


def signed_literal(M, group, skeleton, blocks):
    """``±R^σ`` applied to argument blocks followed by the output block."""
    slots = [None] * len(blocks)
    for j, block in enumerate(blocks, start=1):
        slots[skeleton.perm(j) - 1] = block
    flat = tuple(i for block in slots for i in block)
    member = flat in M.relations[group]
    return member if skeleton.sign == "+" else not member


def truth_set(M, group, skeleton, arg_sets):
    n = M.size
    out = set()
    spaces = [list(itertools.product(range(n), repeat=k)) for k in skeleton.input_types]
    for x in itertools.product(range(n), repeat=skeleton.output_type):
        def marks(xs):
            return [(xj in s) if t == "+" else (xj not in s)
                    for xj, s, t in zip(xs, arg_sets, skeleton.tonicity)]
        if skeleton.quant == "E":
            ok = any(all(marks(xs)) and signed_literal(M, group, skeleton, list(xs) + [x])
                     for xs in itertools.product(*spaces))
        else:
            ok = all(any(marks(xs)) or signed_literal(M, group, skeleton, list(xs) + [x])
                     for xs in itertools.product(*spaces))
        if ok:
            out.add(x)
    return out


def naive_denote(C, M, phi):
    """Truth set of ``phi`` in ``M`` as a set of index tuples."""
    n = M.size
    if isinstance(phi, Letter):
        s = C.letters[phi.name]
        base = {t for t in M.relations[C.group(phi.name)]}
        neg = (s.sign == "-") != phi.negated
        full = set(itertools.product(range(n), repeat=phi.type))
        return full - base if neg else base
    if isinstance(phi, BoolOp):
        a, b = naive_denote(C, M, phi.left), naive_denote(C, M, phi.right)
        return a & b if phi.kind == "and" else a | b
    if isinstance(phi, Apply):
        args = iter([naive_denote(C, M, a) for a in phi.args])

        def go(node):
            if isinstance(node, IdLeaf):
                return next(args)
            if isinstance(node, LetterLeaf):
                return naive_denote(C, M, Letter(node.name, node.skeleton.output_type))
            kids = [go(c) for c in node.children]
            return truth_set(M, C.group(node.conn), node.skeleton, kids)

        return go(C.tree(phi.conn, phi.negated))
    raise TypeError(phi)


def as_index_set(den, n, k):
    """Turn a flat boolean row into a set of index tuples."""
    out = set()
    for flat, v in enumerate(den):
        if v:
            t = []
            for _ in range(k):
                flat, r = divmod(flat, n)
                t.append(r)
            out.add(tuple(reversed(t)))
    return out
