#!/usr/bin/env python3
"""Benchmark the compiled typicality-scan kernel against the numpy fallback.

Run from the repository root after an editable install:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from cosetsum import kernels
from cosetsum.probability import typicality_bounds

CASES = [
    # (q, y_size, rows, n) roughly spanning encoder and decoder scans
    (2, 1, 1 << 11, 16),
    (2, 2, 1 << 13, 16),
    (2, 2, 1 << 16, 24),
    (5, 3, 5**6, 12),
]


def bench(backend: str, cb, y, q, y_size, lo, hi, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        kernels.typical_mask(cb, y, q, y_size, lo, hi, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    rng = np.random.default_rng(0)
    print(f"compiled extension available: {kernels.HAVE_COMPILED}")
    print(f"{'q':>2} {'|Y|':>3} {'rows':>7} {'n':>3} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for q, y_size, rows, n in CASES:
        cb = rng.integers(0, q, size=(rows, n), dtype=np.int64)
        y = rng.integers(0, y_size, size=n, dtype=np.int64)
        p = rng.random((q, y_size))
        p /= p.sum()
        lo, hi = typicality_bounds(p, n, 0.25)
        t_py = bench("python", cb, y, q, y_size, lo, hi, repeats=5)
        if kernels.HAVE_COMPILED:
            t_c = bench("compiled", cb, y, q, y_size, lo, hi, repeats=5)
            ratio = f"{t_py / t_c:7.1f}x"
            t_c_str = f"{t_c * 1e3:9.2f}ms"
        else:
            t_c_str, ratio = "n/a", "n/a"
        print(f"{q:>2} {y_size:>3} {rows:>7} {n:>3} {t_py * 1e3:9.2f}ms {t_c_str:>10} {ratio:>8}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
