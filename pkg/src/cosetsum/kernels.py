"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

`python -m benchmarks.bench_kernels` (repo checkout) compares the two.
"""

from __future__ import annotations

import numpy as np

from . import _kernels_py

try:  # compiled extension is optional
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on build environment
    _compiled = None

HAVE_COMPILED = _compiled is not None
ACTIVE_BACKEND = "compiled" if HAVE_COMPILED else "python"


def typical_mask(codebook, y, q, y_size, lo, hi, *, backend: str | None = None):
    """Rows of `codebook` whose joint type with `y` lies within [lo, hi]."""
    codebook = np.ascontiguousarray(codebook, dtype=np.int64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    if backend is None:
        backend = ACTIVE_BACKEND
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel requested but extension is not built")
        return _compiled.typical_mask(codebook, y, int(q), int(y_size), lo, hi)
    return _kernels_py.typical_mask(codebook, y, int(q), int(y_size), lo, hi)
