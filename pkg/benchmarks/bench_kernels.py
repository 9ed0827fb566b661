"""Timing comparison of the jitted kernels against the pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--agents 60] [--steps 20000]
The dispatch itself is controlled by OPINION_PURE_NUMPY; this script times
both implementations directly, regardless of which one the package selected.
"""

import argparse
import time

import numpy as np

from opiniondyn import _kernels as k


def _timeit(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--agents", type=int, default=60)
    parser.add_argument("--issues", type=int, default=4)
    parser.add_argument("--steps", type=int, default=20_000)
    parser.add_argument("--grid", type=int, default=200_000)
    args = parser.parse_args()

    if k.BACKEND != "numba":
        print("note: package dispatch resolved to the numpy backend; "
              "timing the jitted kernels requires numba importable")
    try:
        from numba import njit
    except ImportError:
        print("numba unavailable; nothing to compare")
        return

    jit_linear = njit(cache=True)(k.iterate_linear_numpy)
    jit_coupled = njit(cache=True)(k.iterate_coupled_numpy)
    jit_scan = njit(cache=True)(k._scan_magnitude_nb_impl)

    rng = np.random.default_rng(0)
    n, p = args.agents, args.issues
    M = np.eye(n) - rng.uniform(0, 1.0 / n, (n, n))
    M /= np.abs(np.linalg.eigvals(M)).max() + 1e-3  # keep iterations bounded
    x0 = rng.uniform(-1, 1, n)
    X0 = rng.uniform(-1, 1, (n, p))
    Ct = rng.uniform(-0.3, 0.3, (p, p))
    rhos = np.linspace(1e-4, 5.0, args.grid)
    lams = rng.uniform(0.1, 2.0, 8) + 1j * rng.uniform(-1, 1, 8)

    # trigger compilation outside the timed region
    jit_linear(M, x0, 3, 0.0, 2, 1e12)
    jit_coupled(M, Ct, X0, 3, 0.0, 2, 1e12)
    jit_scan(rhos[:4], lams, 0.0, True)

    rows = [
        (
            f"iterate_linear  ({n} agents, {args.steps} steps)",
            _timeit(jit_linear, M, x0, args.steps, 0.0, 2, 1e12),
            _timeit(k.iterate_linear_numpy, M, x0, args.steps, 0.0, 2, 1e12),
        ),
        (
            f"iterate_coupled ({n}x{p}, {args.steps} steps)",
            _timeit(jit_coupled, M, Ct, X0, args.steps, 0.0, 2, 1e12),
            _timeit(k.iterate_coupled_numpy, M, Ct, X0, args.steps, 0.0, 2, 1e12),
        ),
        (
            f"scan_magnitude  ({args.grid} grid points, 8 eigenvalues)",
            _timeit(jit_scan, rhos, lams, 0.0, True),
            _timeit(k.scan_magnitude_numpy, rhos, lams, 0.0, True),
        ),
    ]

    print(f"{'kernel':55s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, t_nb, t_np in rows:
        print(f"{name:55s} {t_nb * 1e3:9.2f}ms {t_np * 1e3:9.2f}ms {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
