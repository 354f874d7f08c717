"""Compare the numba and numpy kernel backends.

Part one times the two kernels directly on random inputs of growing size.
Part two times a full maximal-bisimulation computation in a fresh
interpreter per backend (the backend is fixed at import through
``MOLBISIM_BACKEND``).

    python benchmarks/bench_kernels.py [--repeat 5] [--pairs 40]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from molbisim import kernels


def best_of(fn, repeat):
    fn()  # warm-up, includes numba compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def truth_inputs(rng, batch, n):
    # binary connective on type-1 arguments: A = n*n argument tuples
    lit = rng.random((batch, n * n, n)) < 0.2
    args = [rng.random((batch, n)) < 0.5, rng.random((batch, n)) < 0.5]
    return lit, args, (True, False), True


def unsupported_inputs(rng, n):
    trig = rng.random((n * n, n)) < 0.2
    wit = rng.random((n * n, n)) < 0.2
    links = [rng.random((n, n)) < 0.5, rng.random((n, n)) < 0.5]
    return trig, wit, links


def kernel_table(repeat):
    rng = np.random.default_rng(0)
    print("kernel       size   numba (ms)   numpy (ms)")
    for n in (4, 8, 16, 32):
        lit, args, tonic, ex = truth_inputs(rng, 64, n)
        a = best_of(lambda: kernels.truth_numba(lit, args, tonic, ex), repeat)
        b = best_of(lambda: kernels.truth_numpy(lit, args, tonic, ex), repeat)
        print(f"truth        {n:4d}   {a * 1e3:10.3f}   {b * 1e3:10.3f}")
    for n in (4, 8, 16, 24):
        trig, wit, links = unsupported_inputs(rng, n)
        a = best_of(lambda: kernels.unsupported_numba(trig, wit, links), repeat)
        b = best_of(lambda: kernels.unsupported_numpy(trig, wit, links), repeat)
        print(f"unsupported  {n:4d}   {a * 1e3:10.3f}   {b * 1e3:10.3f}")


PIPELINE = """
import time
from molbisim.bisim import maximal_bisimulation
from molbisim.generators import random_pair
from molbisim.presets import preset
for name in ("modal", "lambek", "modal-intuitionistic"):
    C = preset(name).C
    pairs = [random_pair(name, s) for s in range({pairs})]
    maximal_bisimulation(C, *pairs[0])  # warm-up
    t = time.perf_counter()
    for A, B in pairs:
        maximal_bisimulation(C, A, B)
    print(name, time.perf_counter() - t)
"""


def pipeline_table(pairs):
    results = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, MOLBISIM_BACKEND=backend)
        proc = subprocess.run([sys.executable, "-c", PIPELINE.format(pairs=pairs)],
                              capture_output=True, text=True, env=env, check=True)
        for line in proc.stdout.splitlines():
            name, secs = line.split()
            results.setdefault(name, {})[backend] = float(secs)
    print(f"\nmaximal_bisimulation over {pairs} pairs")
    print("preset                 numba (s)   numpy (s)")
    for name, row in results.items():
        print(f"{name:22s} {row['numba']:9.3f}   {row['numpy']:9.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pairs", type=int, default=40)
    args = ap.parse_args()
    kernel_table(args.repeat)
    pipeline_table(args.pairs)


if __name__ == "__main__":
    main()
