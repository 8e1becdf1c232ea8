"""Benchmark the numpy and numba variants of the two hot kernels.

Usage::

    python3 benchmarks/bench_backends.py [--repeats N]

Times ``q1_triplets`` (element-matrix triplet generation) and
``branch_values_batch`` (eigenvalue branches of the reduced blocks over a
batch of mu values) in both backends and prints a speedup table.  Runs
numpy-only when numba is not installed.
"""

import argparse
import time

import numpy as np

from radaukron import factorize
from radaukron._kernels import (
    branch_values_numba,
    branch_values_numpy,
    q1_triplets_numba,
    q1_triplets_numpy,
)
from radaukron.backend import HAVE_NUMBA


def best_of(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repetitions per case (best is reported)")
    args = parser.parse_args()

    cases = []

    for n_side in (65, 129, 257):
        name = f"q1_triplets(n_side={n_side})"
        cases.append((name,
                      lambda n=n_side: q1_triplets_numpy(n),
                      lambda n=n_side: q1_triplets_numba(n)))

    mu = np.logspace(-6, 6, 200_000)
    for q in (3, 5, 10):
        fact = factorize(q)
        name = f"branch_values_batch(q={q}, {mu.size} mu)"
        cases.append((name,
                      lambda f=fact: branch_values_numpy(mu, f.Linv, f.Uhat),
                      lambda f=fact: branch_values_numba(mu, f.Linv, f.Uhat)))

    header = f"{'kernel':<42} {'numpy':>10} {'numba':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, numpy_fn, numba_fn in cases:
        t_np = best_of(numpy_fn, args.repeats)
        if HAVE_NUMBA:
            numba_fn()  # JIT warm-up outside the timed region
            t_nb = best_of(numba_fn, args.repeats)
            print(f"{name:<42} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
                  f"{t_np / t_nb:>7.2f}x")
        else:
            print(f"{name:<42} {t_np * 1e3:>8.2f}ms {'n/a':>10} {'n/a':>8}")
    if not HAVE_NUMBA:
        print("\nnumba not installed; only the numpy backend was timed.")


if __name__ == "__main__":
    main()
