"""Compare the compiled and pure-Python kernels on sphere batches.

    python benchmarks/bench_kernels.py [--repeat 5] [--points 20000]

Prints one line per (kernel, n, degrees, backend) with the best wall time
over ``--repeat`` runs and the speedup of each backend over ``python``.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from polycond.kernels import backends
from polycond.randsys import EnsembleSpec, sample_system

CASES = [
    (2, (3,)),
    (3, (2, 2)),
    (3, (4, 4)),
    (4, (3, 3, 3)),
    (4, (2, 3, 4, 2)),
]


def _points(n, K, rng):
    X = rng.standard_normal((K, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = backends()
    rng = np.random.default_rng(args.seed)
    print(f"backends: {', '.join(impls)}; points per batch: {args.points}")
    print(f"{'kernel':<24}{'n':>3}  {'degrees':<14}{'backend':<9}{'seconds':>10}{'speedup':>9}")
    for n, degrees in CASES:
        P = sample_system(EnsembleSpec.gaussian(n, degrees, seed=args.seed), 0)
        exps, coeffs, row = P.flat_terms()
        isd = 1.0 / P.sqrt_degrees
        X = _points(n, args.points, rng)
        A = rng.standard_normal((args.points, len(degrees), n - 1))
        jobs = {
            "values_jacobians": lambda k: k.system_values_jacobians(exps, coeffs, row, P.m, X),
            "local_condition": lambda k: k.local_condition_batch(exps, coeffs, row, P.m, isd, X),
            "sigma_max": lambda k: k.sigma_max_batch(A),
        }
        for name, job in jobs.items():
            times = {b: _best(lambda: job(k), args.repeat) for b, k in impls.items()}
            ref = times["python"]
            for b, t in times.items():
                deg = ",".join(map(str, degrees))
                print(f"{name:<24}{n:>3}  {deg:<14}{b:<9}{t:>10.4f}{ref / t:>8.1f}x")


if __name__ == "__main__":
    main()
