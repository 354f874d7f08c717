import itertools
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from molbisim import kernels


def brute_truth(lit, args, tonic, exists):
    B, A, N = lit.shape
    sizes = [a.shape[1] for a in args]
    out = np.zeros((B, N), dtype=bool)
    for b in range(B):
        for x in range(N):
            vals = []
            for a, digits in enumerate(itertools.product(*[range(s) for s in sizes])):
                marks = [args[j][b, d] if tonic[j] else not args[j][b, d] for j, d in enumerate(digits)]
                if exists:
                    vals.append(lit[b, a, x] and all(marks))
                else:
                    vals.append(lit[b, a, x] or any(marks))
            out[b, x] = any(vals) if exists else all(vals)
    return out


def brute_unsupported(trig, wit, links, active):
    A, N = trig.shape
    Ap, Np = wit.shape
    sa = [m.shape[0] for m in links]
    sb = [m.shape[1] for m in links]
    left = list(itertools.product(*[range(s) for s in sa]))
    right = list(itertools.product(*[range(s) for s in sb]))
    bad = np.zeros((N, Np), dtype=bool)
    for x in range(N):
        for xp in range(Np):
            if not active[x, xp]:
                continue
            for a, da in enumerate(left):
                if not trig[a, x]:
                    continue
                if not any(wit[ap, xp] and all(links[j][da[j], db[j]] for j in range(len(links)))
                           for ap, db in enumerate(right)):
                    bad[x, xp] = True
                    break
    return bad


@st.composite
def truth_case(draw):
    B = draw(st.integers(1, 3))
    N = draw(st.integers(1, 4))
    n = draw(st.integers(0, 2))
    sizes = [draw(st.integers(1, 4)) for _ in range(n)]
    A = int(np.prod(sizes)) if sizes else 1
    lit = draw(arrays(bool, (B, A, N)))
    args = [draw(arrays(bool, (B, s))) for s in sizes]
    tonic = tuple(draw(st.booleans()) for _ in range(n))
    return lit, args, tonic, draw(st.booleans())


@settings(max_examples=150, deadline=None)
@given(truth_case())
def test_truth_backends_match_brute_force(case):
    lit, args, tonic, exists = case
    want = brute_truth(lit, args, tonic, exists)
    assert np.array_equal(kernels.truth_numpy(lit, args, tonic, exists), want)
    assert np.array_equal(kernels.truth_numba(lit, args, tonic, exists), want)


@st.composite
def unsupported_case(draw):
    N = draw(st.integers(1, 4))
    Np = draw(st.integers(1, 4))
    n = draw(st.integers(0, 2))
    sa = [draw(st.integers(1, 3)) for _ in range(n)]
    sb = [draw(st.integers(1, 3)) for _ in range(n)]
    A = int(np.prod(sa)) if sa else 1
    Ap = int(np.prod(sb)) if sb else 1
    trig = draw(arrays(bool, (A, N)))
    wit = draw(arrays(bool, (Ap, Np)))
    links = [draw(arrays(bool, (a, b))) for a, b in zip(sa, sb)]
    active = draw(arrays(bool, (N, Np)))
    return trig, wit, links, active


@settings(max_examples=150, deadline=None)
@given(unsupported_case())
def test_unsupported_backends_match_brute_force(case):
    trig, wit, links, active = case
    want = brute_unsupported(trig, wit, links, active)
    assert np.array_equal(kernels.unsupported_numpy(trig, wit, links, active), want)
    assert np.array_equal(kernels.unsupported_numba(trig, wit, links, active), want)


def test_backend_flag_selects_numpy():
    code = "from molbisim import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, MOLBISIM_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_backend_flag_rejects_unknown():
    code = "import molbisim.kernels"
    env = dict(os.environ, MOLBISIM_BACKEND="cuda")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.returncode != 0 and "MOLBISIM_BACKEND" in out.stderr


def test_whole_pipeline_same_under_both_backends():
    code = """
from molbisim.presets import preset
from molbisim.bisim import maximal_bisimulation
from molbisim.generators import random_pair
P = preset('modal-intuitionistic')
sig = []
for s in range(12):
    A, B = random_pair('modal-intuitionistic', s)
    fam = maximal_bisimulation(P.C, A, B)
    sig.append(sorted((k, int(v[0].sum()), int(v[1].sum())) for k, v in fam.relations.items()))
print(sig)
"""
    outs = []
    for backend in ("numpy", "numba"):
        env = dict(os.environ, MOLBISIM_BACKEND=backend)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        outs.append(res.stdout)
    assert outs[0] == outs[1]


@pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")
def test_default_backend_is_numba():
    if os.environ.get("MOLBISIM_BACKEND", "numba") == "numba":
        assert kernels.BACKEND == "numba"
