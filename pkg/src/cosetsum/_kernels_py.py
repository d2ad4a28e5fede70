"""Pure-numpy fallback for the hot typicality-scan kernel.

Semantics must match the compiled extension in _kernels.pyx exactly: both
count joint symbol occurrences of every codebook row against a fixed
received sequence and test the counts against inclusive per-cell bounds.
"""

from __future__ import annotations

import numpy as np


def typical_mask(
    codebook: np.ndarray,
    y: np.ndarray,
    q: int,
    y_size: int,
    lo: np.ndarray,
    hi: np.ndarray,
) -> np.ndarray:
    """Boolean mask of codebook rows whose joint type with y is inside bounds.

    codebook: (rows, n) int64 symbols in [0, q)
    y: (n,) int64 symbols in [0, y_size)
    lo, hi: (q, y_size) float64 inclusive count bounds per (symbol, y) cell
    """
    rows = codebook.shape[0]
    mask = np.ones(rows, dtype=bool)
    for yv in range(y_size):
        cols = np.nonzero(y == yv)[0]
        ncols = len(cols)
        if ncols == 0:
            # every cell in this column has count 0
            mask &= np.all(lo[:, yv] <= 0.0) and np.all(hi[:, yv] >= 0.0)
            if not mask.any():
                return mask
            continue
        sub = codebook[:, cols]
        remaining = np.full(rows, ncols, dtype=np.int64)
        for z in range(q - 1):
            c = (sub == z).sum(axis=1)
            remaining -= c
            mask &= (c >= lo[z, yv]) & (c <= hi[z, yv])
        mask &= (remaining >= lo[q - 1, yv]) & (remaining <= hi[q - 1, yv])
    return mask
