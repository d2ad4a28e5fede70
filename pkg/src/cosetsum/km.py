"""Syndrome-based distributed source code for the modulo-sum of two sources.

Encoding multiplies the source block by a random parity-check matrix h; the
decoder reconstructs the sum of the blocks from the sum of the syndromes by
exact maximum likelihood over the affine solution set of h z = m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DecodeFailure, DimensionError
from .galois import (
    DEFAULT_ENUM_BUDGET_BITS,
    FieldMatrix,
    FieldVector,
    all_tuples,
    check_enum_budget,
    mat_vec_mul,
    sample_uniform_matrix,
    solve_affine,
)


@dataclass(frozen=True)
class KmCode:
    q: int
    n: int
    l: int
    h: FieldMatrix

    def __post_init__(self):
        if self.l > self.n:
            raise DimensionError(f"l={self.l} exceeds n={self.n}")
        if self.h.values.shape != (self.l, self.n) or self.h.q != self.q:
            raise DimensionError("parity-check matrix shape does not match (l, n)")


def km_build(q: int, n: int, l: int, rng: np.random.Generator) -> KmCode:
    """Sample a uniform parity-check matrix; deterministic for a seeded rng."""
    return KmCode(q, n, l, sample_uniform_matrix(q, l, n, rng))


def km_encode(code: KmCode, s: FieldVector) -> FieldVector:
    """Syndrome h @ s of a source block."""
    if len(s) != code.n:
        raise DimensionError(f"source block has length {len(s)}, code expects {code.n}")
    return mat_vec_mul(code.h, s)


def km_sum_decode(
    code: KmCode,
    m: FieldVector,
    pz: np.ndarray,
    budget_bits: int = DEFAULT_ENUM_BUDGET_BITS,
) -> FieldVector | DecodeFailure:
    """Most likely z with h z = m under the iid law pz of the symbol sum.

    Ties are broken toward the lexicographically smallest maximizer, so
    decoding is reproducible. Returns DecodeFailure when m is outside the
    image of h (possible for rank-deficient h).
    """
    if len(m) != code.l:
        raise DimensionError(f"syndrome has length {len(m)}, code expects {code.l}")
    pz = np.asarray(pz, dtype=float)
    solution = solve_affine(code.h, m)
    if solution is None:
        return DecodeFailure(reason="syndrome_outside_image")
    z0, basis = solution
    dim = basis.rows
    check_enum_budget(code.q, dim, budget_bits)
    coeffs = all_tuples(code.q, dim)
    zs = (coeffs @ basis.values + z0.values) % code.q if dim else z0.values[None, :]
    counts = np.empty((zs.shape[0], code.q), dtype=np.int64)
    for sym in range(code.q):
        counts[:, sym] = (zs == sym).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.log(pz)
        scores = np.where(counts > 0, counts * logp[None, :], 0.0).sum(axis=1)
    best = scores.max()
    cand = np.nonzero(scores == best)[0]
    rows = zs[cand]
    order = np.lexsort(rows.T[::-1])
    return FieldVector(code.q, rows[order[0]])
