"""Boolean tensor kernels shared by the model checker and the bisimulation solver.

Two kernels do the heavy lifting:

``truth``
    Applies one atomic truth condition to a batch of models.  ``lit`` is the
    signed, block-ordered relation literal of shape ``(B, A, N)`` where ``A``
    is the flattened product of the argument block sizes and ``N`` the
    number of output tuples; ``args`` holds the argument denotations padded
    to ``(n, B, maxS)``.

``unsupported``
    Finds the pairs ``(x, x')`` that violate one existential bisimulation
    clause: some trigger tuple ``(a1..an, x)`` has no witness
    ``(b1..bn, x')`` with every ``links[j][a_j, b_j]`` set.

Each kernel has a numba implementation and a pure numpy one.  The backend
is picked once at import from ``MOLBISIM_BACKEND`` (``numba`` or ``numpy``);
when numba cannot be imported the numpy versions are used.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly when numba is present
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap


def _requested_backend() -> str:
    name = os.environ.get("MOLBISIM_BACKEND", "numba").strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"MOLBISIM_BACKEND must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


# --------------------------------------------------------------------------
# helpers

def pad_args(args, batch: int) -> tuple[np.ndarray, np.ndarray]:
    """Stack ``n`` arrays of shape ``(B, S_j)`` into ``(n, B, maxS)`` plus sizes."""
    n = len(args)
    sizes = np.array([a.shape[1] for a in args], dtype=np.int64)
    width = int(sizes.max()) if n else 1
    out = np.zeros((max(n, 1), batch, width), dtype=np.bool_)
    for j, a in enumerate(args):
        out[j, :, : a.shape[1]] = a
    return out, sizes


def pad_links(links) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = len(links)
    sa = np.array([m.shape[0] for m in links], dtype=np.int64)
    sb = np.array([m.shape[1] for m in links], dtype=np.int64)
    wa = int(sa.max()) if n else 1
    wb = int(sb.max()) if n else 1
    out = np.zeros((max(n, 1), wa, wb), dtype=np.bool_)
    for j, m in enumerate(links):
        out[j, : m.shape[0], : m.shape[1]] = m
    return out, sa, sb


# --------------------------------------------------------------------------
# truth kernel

def truth_numpy(lit, args, tonic, exists):
    """Reference numpy implementation; ``args`` is a list of ``(B, S_j)`` arrays."""
    lit = np.asarray(lit, dtype=np.bool_)
    B, _, N = lit.shape
    if exists:
        cur = lit
        marks = [a if t else ~a for a, t in zip(args, tonic)]
    else:
        # forall a (L or m1 or ... or mn)  ==  not exists a (not L and not m1 ...)
        cur = ~lit
        marks = [~a if t else a for a, t in zip(args, tonic)]
    for m in marks:
        S = m.shape[1]
        cur = cur.reshape(B, S, -1)
        cur = np.matmul(m[:, None, :].astype(np.float32), cur.astype(np.float32))[:, 0, :] > 0
    found = cur.reshape(B, N)
    return found if exists else ~found


@njit(cache=True)
def _truth_loops(lit, args, sizes, tonic, exists):
    B, A, N = lit.shape
    n = sizes.shape[0]
    out = np.empty((B, N), dtype=np.bool_)
    digits = np.zeros(n, dtype=np.int64)
    for b in range(B):
        for x in range(N):
            out[b, x] = not exists
        for a in range(A):
            rem = a
            for j in range(n - 1, -1, -1):
                digits[j] = rem % sizes[j]
                rem //= sizes[j]
            if exists:
                ok = True
                for j in range(n):
                    v = args[j, b, digits[j]]
                    if v != tonic[j]:
                        ok = False
                        break
                if ok:
                    for x in range(N):
                        if lit[b, a, x]:
                            out[b, x] = True
            else:
                hit = False
                for j in range(n):
                    v = args[j, b, digits[j]]
                    if v == tonic[j]:
                        hit = True
                        break
                if not hit:
                    for x in range(N):
                        if not lit[b, a, x]:
                            out[b, x] = False
    return out


def truth_numba(lit, args, tonic, exists):
    lit = np.ascontiguousarray(lit, dtype=np.bool_)
    B = lit.shape[0]
    padded, sizes = pad_args(args, B)
    ton = np.array(list(tonic) if len(tonic) else [True], dtype=np.bool_)
    if not len(args):
        sizes = np.zeros(0, dtype=np.int64)
    return _truth_loops(lit, padded, sizes, ton, bool(exists))


# --------------------------------------------------------------------------
# clause kernel

def unsupported_numpy(trig, wit, links, active=None):
    """Pairs ``(x, x')`` with a trigger ``trig[a, x]`` lacking a witness.

    ``trig`` has shape ``(A, N)``, ``wit`` shape ``(A', N')`` and each
    ``links[j]`` shape ``(S_j, S'_j)`` with ``A = prod S_j`` and
    ``A' = prod S'_j``.  Returns a bool matrix ``(N, N')``, masked by
    ``active`` when given.
    """
    trig = np.asarray(trig, dtype=np.bool_)
    wit = np.asarray(wit, dtype=np.bool_)
    n = len(links)
    Np = wit.shape[1]
    sb = [m.shape[1] for m in links]
    cur = wit.reshape(tuple(sb) + (Np,)).astype(np.float32)
    for j, m in enumerate(links):
        # contract axis j (size S'_j) against link matrix rows a_j
        cur = np.tensordot(m.astype(np.float32), cur, axes=([1], [j]))
        cur = np.moveaxis(cur, 0, j)
        cur = (cur > 0).astype(np.float32)
    supported = cur.reshape(-1, Np) > 0
    if n == 0:
        supported = supported.reshape(1, Np)
    bad = trig.T.astype(np.float32) @ (~supported).astype(np.float32) > 0
    if active is not None:
        bad &= active
    return bad


@njit(cache=True)
def _unsupported_loops(trig, wit, links, sa, sb, active):
    A, N = trig.shape
    Ap, Np = wit.shape
    n = sa.shape[0]
    da = np.zeros((A, max(n, 1)), dtype=np.int64)
    db = np.zeros((Ap, max(n, 1)), dtype=np.int64)
    for a in range(A):
        rem = a
        for j in range(n - 1, -1, -1):
            da[a, j] = rem % sa[j]
            rem //= sa[j]
    for b in range(Ap):
        rem = b
        for j in range(n - 1, -1, -1):
            db[b, j] = rem % sb[j]
            rem //= sb[j]
    # supported[a, xp]: trigger arguments a have a witness at xp
    supported = np.zeros((A, Np), dtype=np.bool_)
    for b in range(Ap):
        for a in range(A):
            ok = True
            for j in range(n):
                if not links[j, da[a, j], db[b, j]]:
                    ok = False
                    break
            if ok:
                for xp in range(Np):
                    if wit[b, xp]:
                        supported[a, xp] = True
    bad = np.zeros((N, Np), dtype=np.bool_)
    for x in range(N):
        for a in range(A):
            if not trig[a, x]:
                continue
            for xp in range(Np):
                if active[x, xp] and not supported[a, xp]:
                    bad[x, xp] = True
    return bad


def unsupported_numba(trig, wit, links, active=None):
    trig = np.ascontiguousarray(trig, dtype=np.bool_)
    wit = np.ascontiguousarray(wit, dtype=np.bool_)
    padded, sa, sb = pad_links(links)
    if not len(links):
        sa = np.zeros(0, dtype=np.int64)
        sb = np.zeros(0, dtype=np.int64)
    if active is None:
        active = np.ones((trig.shape[1], wit.shape[1]), dtype=np.bool_)
    return _unsupported_loops(trig, wit, padded, sa, sb, np.ascontiguousarray(active, dtype=np.bool_))


# --------------------------------------------------------------------------
# dispatch

BACKEND = _requested_backend()

if BACKEND == "numba":
    truth = truth_numba
    unsupported = unsupported_numba
else:
    truth = truth_numpy
    unsupported = unsupported_numpy
