#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure NumPy/SciPy fallback.

Runs the three hot loops on representative workloads and prints a table of
timings and speedups. Use --quick for smaller workloads.
"""

import argparse
import time

import numpy as np

import rfmnet._backend as backend

try:
    import rfmnet._kernels as compiled
except ImportError:
    compiled = None
import rfmnet._kernels_py as fallback

from rfmnet.tasep import TasepConfig, run_tasep
from rfmnet.types import RateProfile


def _time(fn, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_tasep(kernels, ticks, n):
    cfg = TasepConfig(n=n, rates=RateProfile.homogeneous(n, 1.0),
                      measure_cycles=ticks, seed=1234, burn_in_cycles=0)
    backend.kernels = kernels
    return _time(lambda: run_tasep(cfg))


def bench_rk45(kernels, n, horizon):
    lam = np.ascontiguousarray(np.linspace(0.5, 2.0, n + 1))
    out_t = np.empty(1)
    out_x = np.empty((1, n))

    def run():
        x = np.full(n, 0.25)
        kernels.rk45_chunk(lam, x, 0.0, horizon, 1e-10, 1e-12, 0.05, 1e-14,
                           np.inf, 0.0, 1 << 62, out_t, out_x, False)

    return _time(run)


def bench_eig(kernels, n, repeats):
    rng = np.random.default_rng(0)
    b = np.ascontiguousarray(rng.uniform(0.3, 3.0, n + 1))

    def run():
        for _ in range(repeats):
            kernels.max_eigenvalue_offdiag(b)

    return _time(run)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true")
    args = parser.parse_args()

    ticks = 100_000 if args.quick else 500_000
    horizon = 100.0 if args.quick else 500.0
    eig_n = 2_000 if args.quick else 10_000
    eig_rep = 20 if args.quick else 100

    cases = [
        (f"lattice ticks ({ticks} ticks, n=19)",
         lambda k: bench_tasep(k, ticks, 19)),
        (f"ode steps (n=50, horizon={horizon:g})",
         lambda k: bench_rk45(k, 50, horizon)),
        (f"top eigenvalue (n={eig_n}, x{eig_rep})",
         lambda k: bench_eig(k, eig_n, eig_rep)),
    ]

    saved = backend.kernels
    print(f"{'kernel':40s} {'compiled':>10s} {'fallback':>10s} {'speedup':>8s}")
    try:
        for name, fn in cases:
            t_py = fn(fallback)
            t_cy = fn(compiled) if compiled is not None else float("nan")
            ratio = t_py / t_cy if compiled is not None else float("nan")
            print(f"{name:40s} {t_cy:9.4f}s {t_py:9.4f}s {ratio:7.1f}x")
    finally:
        backend.kernels = saved
    if compiled is None:
        print("compiled extension not available; build it with "
              "`pip install -e .` or `python setup.py build_ext --inplace`")


if __name__ == "__main__":
    main()
