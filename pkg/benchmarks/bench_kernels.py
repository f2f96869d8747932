"""Timing comparison of the direct-advection oracle backends.

Runs the numba quadruple loop and the numpy/scipy convolution fallback on
the same random solenoidal fields and reports per-call wall time plus the
dealiased FFT advection for context.  The oracle is quadratic in the mode
count, so sizes stay within its n1*n2 <= 1024 guard.

Usage:
    python benchmarks/bench_kernels.py [--repeats 20] [--sizes 8 16 32]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ans2d.kernels import HAS_NUMBA
from ans2d.spectral import (
    TorusGrid,
    nonlinear_term,
    nonlinear_term_oracle,
    random_solenoidal_field,
)


def _time_call(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_size(n: int, repeats: int, rng: np.random.Generator) -> dict[str, float]:
    grid = TorusGrid(n, n)
    u = random_solenoidal_field(grid, band=n // 3, amplitude=1.0, rng=rng)
    rows: dict[str, float] = {}
    rows["fft"] = _time_call(lambda: nonlinear_term(u), repeats)
    rows["numpy"] = _time_call(lambda: nonlinear_term_oracle(u, backend="numpy"), repeats)
    if HAS_NUMBA:
        nonlinear_term_oracle(u, backend="numba")  # jit compile outside the timer
        rows["numba"] = _time_call(lambda: nonlinear_term_oracle(u, backend="numba"), repeats)
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20,
                        help="calls per backend and size; best time is kept")
    parser.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32],
                        help="square grid sizes n (oracle guard needs n*n <= 1024)")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    if not HAS_NUMBA:
        print("numba not importable; benchmarking the numpy backend only")
    header = f"{'n':>4} {'fft (ms)':>10} {'numpy (ms)':>11}"
    if HAS_NUMBA:
        header += f" {'numba (ms)':>11} {'numpy/numba':>12}"
    print(header)
    for n in args.sizes:
        rows = bench_size(n, args.repeats, rng)
        line = f"{n:>4} {rows['fft'] * 1e3:>10.3f} {rows['numpy'] * 1e3:>11.3f}"
        if HAS_NUMBA:
            line += f" {rows['numba'] * 1e3:>11.3f} {rows['numpy'] / rows['numba']:>12.1f}x"
        print(line)


if __name__ == "__main__":
    main()
