"""Timing comparison of the compiled and pure-numpy kernel backends.

Runs each kernel on a workload shaped like the package's hot paths (basis
tables for 1e6 quadrature points, the envelope and basis matrix of a
(d=2, p=16) total-order set over 2e5 samples, and a 1e6-step
Metropolis-Hastings scan), reports best-of-k wall times for both backends,
and cross-checks that the outputs agree bitwise.

Usage: python3 benchmarks/bench_kernels.py [--repeats K]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sparsepc import backends
from sparsepc.index_set import build_index_set


def best_of(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats per kernel")
    args = parser.parse_args(argv)

    try:
        comp = backends.get_backend("compiled")
    except ImportError:
        print("compiled extension not built; nothing to compare")
        return 1
    py = backends.get_backend("python")

    rng = np.random.default_rng(20240814)
    x = rng.normal(size=1_000_000)
    pts = rng.normal(size=(200_000, 2))
    pts_leg = np.tanh(pts)
    idx = build_index_set(2, 16)
    score = rng.normal(size=1_000_000)
    log_u = np.log(rng.random(1_000_000))

    cases = [
        ("poly_table  hermite p=32, 1e6 pts", lambda m: m.poly_table(x, 32, backends.HERMITE)),
        ("envelope    hermite (2,16), 2e5 pts", lambda m: m.envelope(pts, 16, backends.HERMITE)),
        ("basis_matrix legendre (2,16), 2e5 pts", lambda m: m.basis_matrix(pts_leg, idx, 16, backends.LEGENDRE)),
        ("mh_scan     1e6 steps", lambda m: m.mh_scan(score, log_u, -1.5)),
    ]

    print(f"{'kernel':40s} {'compiled':>10s} {'python':>10s} {'speedup':>8s}")
    for label, call in cases:
        t_c, out_c = best_of(lambda: call(comp), args.repeats)
        t_p, out_p = best_of(lambda: call(py), args.repeats)
        if isinstance(out_c, tuple):
            same = all(
                np.array_equal(a, b) if isinstance(a, np.ndarray) else a == b
                for a, b in zip(out_c, out_p)
            )
        else:
            same = np.array_equal(out_c, out_p)
        flag = "" if same else "  MISMATCH"
        print(f"{label:40s} {t_c * 1e3:8.1f}ms {t_p * 1e3:8.1f}ms {t_p / t_c:7.1f}x{flag}")
        if not same:
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
