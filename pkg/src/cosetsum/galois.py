"""Exact arithmetic and linear algebra over prime fields F_q.

Everything is dense and desk-scale (n <= 64, q <= 257): matrices are stored
as small int64 numpy arrays of residues and all products are computed in
int64 then reduced mod q, which is exact for these sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, ConstructionError, DimensionError, DomainError

MAX_PRIME = 257
DEFAULT_ENUM_BUDGET_BITS = 24


def is_prime(q: int) -> bool:
    """Trial-division primality check (sufficient for q <= 257)."""
    if q < 2:
        return False
    d = 2
    while d * d <= q:
        if q % d == 0:
            return False
        d += 1
    return True


class PrimeField:
    """The prime field F_q with residue representatives 0..q-1."""

    __slots__ = ("q",)

    def __init__(self, q: int):
        if not isinstance(q, (int, np.integer)) or not is_prime(int(q)):
            raise ConstructionError(f"modulus {q!r} is not prime")
        if q > MAX_PRIME:
            raise ConstructionError(f"modulus {q} exceeds supported maximum {MAX_PRIME}")
        self.q = int(q)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def neg(self, a: int) -> int:
        return (-a) % self.q

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def inv(self, a: int) -> int:
        if a % self.q == 0:
            raise DomainError("zero has no multiplicative inverse")
        return pow(int(a), self.q - 2, self.q)

    def elements(self) -> range:
        return range(self.q)

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.q == self.q

    def __hash__(self) -> int:
        return hash(("PrimeField", self.q))

    def __repr__(self) -> str:
        return f"PrimeField({self.q})"


def field_op(q: int, op: str, a: int, b: int | None = None) -> int:
    """Single scalar field operation; validates operands against [0, q)."""
    f = PrimeField(q)
    operands = (a,) if b is None else (a, b)
    for x in operands:
        if not 0 <= x < q:
            raise DomainError(f"operand {x} outside [0, {q})")
    if op == "add":
        return f.add(a, b)
    if op == "mul":
        return f.mul(a, b)
    if op == "neg":
        return f.neg(a)
    if op == "inv":
        return f.inv(a)
    raise DomainError(f"unknown op {op!r}")


def _as_residues(q: int, values, ndim: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    if arr.ndim != ndim:
        raise DimensionError(f"expected {ndim}-dimensional data, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() >= q):
        raise DomainError(f"entries outside [0, {q})")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FieldVector:
    """Immutable vector of residues mod q."""

    q: int
    values: np.ndarray

    def __post_init__(self):
        PrimeField(self.q)
        object.__setattr__(self, "values", _as_residues(self.q, self.values, 1))

    def __len__(self) -> int:
        return len(self.values)

    def __add__(self, other: "FieldVector") -> "FieldVector":
        _check_same(self, other)
        return FieldVector(self.q, (self.values + other.values) % self.q)

    def __sub__(self, other: "FieldVector") -> "FieldVector":
        _check_same(self, other)
        return FieldVector(self.q, (self.values - other.values) % self.q)

    def scale(self, c: int) -> "FieldVector":
        return FieldVector(self.q, (self.values * (c % self.q)) % self.q)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldVector)
            and other.q == self.q
            and np.array_equal(other.values, self.values)
        )

    def __hash__(self) -> int:
        return hash((self.q, self.values.tobytes()))

    def __repr__(self) -> str:
        return f"FieldVector(q={self.q}, {self.values.tolist()})"


@dataclass(frozen=True)
class FieldMatrix:
    """Immutable r x n matrix of residues mod q."""

    q: int
    values: np.ndarray

    def __post_init__(self):
        PrimeField(self.q)
        object.__setattr__(self, "values", _as_residues(self.q, self.values, 2))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldMatrix)
            and other.q == self.q
            and np.array_equal(other.values, self.values)
        )

    def __hash__(self) -> int:
        return hash((self.q, self.values.shape, self.values.tobytes()))

    def __repr__(self) -> str:
        return f"FieldMatrix(q={self.q}, shape={self.values.shape})"


def _check_same(a, b):
    if a.q != b.q:
        raise DimensionError(f"modulus mismatch: {a.q} vs {b.q}")


def zeros_vector(q: int, n: int) -> FieldVector:
    return FieldVector(q, np.zeros(n, dtype=np.int64))


def mat_vec_mul(m: FieldMatrix, v: FieldVector) -> FieldVector:
    """Matrix-on-the-left product m @ v, the syndrome-map convention."""
    _check_same(m, v)
    if m.cols != len(v):
        raise DimensionError(f"matrix is {m.rows}x{m.cols}, vector has length {len(v)}")
    return FieldVector(m.q, (m.values @ v.values) % m.q)


def vec_mat_mul(v: FieldVector, m: FieldMatrix) -> FieldVector:
    """Row-vector-times-matrix product v @ m, the generator-map convention."""
    _check_same(v, m)
    if m.rows != len(v):
        raise DimensionError(f"vector has length {len(v)}, matrix is {m.rows}x{m.cols}")
    return FieldVector(m.q, (v.values @ m.values) % m.q)


def rank(m: FieldMatrix) -> int:
    """Rank over F_q by Gaussian elimination."""
    _, pivots = rref(m.values, m.q)
    return len(pivots)


def rref(values: np.ndarray, q: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod q; returns (matrix, pivot columns)."""
    f = PrimeField(q)
    a = np.array(values, dtype=np.int64) % q
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        sel = None
        for rr in range(r, rows):
            if a[rr, c] != 0:
                sel = rr
                break
        if sel is None:
            continue
        if sel != r:
            a[[r, sel]] = a[[sel, r]]
        a[r] = (a[r] * f.inv(int(a[r, c]))) % q
        for rr in range(rows):
            if rr != r and a[rr, c] != 0:
                a[rr] = (a[rr] - a[rr, c] * a[r]) % q
        pivots.append(c)
        r += 1
    return a, pivots


def solve_affine(m: FieldMatrix, rhs: FieldVector) -> tuple[FieldVector, FieldMatrix] | None:
    """Solve m @ z = rhs over F_q.

    Returns (particular solution, nullspace basis as rows), or None when the
    system is inconsistent (rhs outside the image of m).
    """
    _check_same(m, rhs)
    if m.rows != len(rhs):
        raise DimensionError("rhs length does not match matrix rows")
    q, n = m.q, m.cols
    aug = np.concatenate([m.values, rhs.values[:, None]], axis=1)
    red, pivots = rref(aug, q)
    if n in pivots:
        return None
    z0 = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(pivots):
        z0[c] = red[i, n]
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for bi, fc in enumerate(free):
        basis[bi, fc] = 1
        for i, c in enumerate(pivots):
            basis[bi, c] = (-red[i, fc]) % q
    return FieldVector(q, z0), FieldMatrix(q, basis)


def all_tuples(q: int, k: int) -> np.ndarray:
    """All q^k tuples over F_q in lexicographic order (first digit most significant)."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(q**k, dtype=np.int64)
    out = np.empty((q**k, k), dtype=np.int64)
    for pos in range(k - 1, -1, -1):
        out[:, pos] = idx % q
        idx //= q
    return out


def tuple_index(digits: np.ndarray, q: int) -> int:
    """Lexicographic rank of a digit tuple, inverse of all_tuples row order."""
    idx = 0
    for d in np.asarray(digits, dtype=np.int64):
        idx = idx * q + int(d)
    return idx


def index_tuple(idx: int, q: int, k: int) -> np.ndarray:
    digits = np.zeros(k, dtype=np.int64)
    for pos in range(k - 1, -1, -1):
        digits[pos] = idx % q
        idx //= q
    return digits


def check_enum_budget(q: int, exponent: int, budget_bits: int = DEFAULT_ENUM_BUDGET_BITS):
    if exponent * np.log2(q) > budget_bits:
        raise BudgetError(
            f"enumeration of {q}^{exponent} items exceeds the {budget_bits}-bit budget"
        )


def codeword(code, a: FieldVector, m: FieldVector) -> FieldVector:
    """Affine codeword a @ g_i + m @ g_oi + b of a nested coset code."""
    if a.q != code.q or m.q != code.q:
        raise DimensionError("modulus mismatch between code and indices")
    if len(a) != code.k or len(m) != code.l:
        raise DimensionError(
            f"index lengths ({len(a)},{len(m)}) do not match code (k={code.k}, l={code.l})"
        )
    v = (a.values @ code.g_i.values + m.values @ code.g_oi.values + code.b.values) % code.q
    return FieldVector(code.q, v)


def enumerate_coset(code, m: FieldVector, budget_bits: int = DEFAULT_ENUM_BUDGET_BITS):
    """All q^k codewords of the coset indexed by m, in lexicographic a-order."""
    check_enum_budget(code.q, code.k, budget_bits)
    return [
        FieldVector(code.q, row)
        for row in coset_matrix(code, m, budget_bits=budget_bits)
    ]


def coset_matrix(code, m: FieldVector, budget_bits: int = DEFAULT_ENUM_BUDGET_BITS) -> np.ndarray:
    """The coset of m as a q^k x n integer matrix (rows in lexicographic a-order)."""
    check_enum_budget(code.q, code.k, budget_bits)
    a_all = all_tuples(code.q, code.k)
    base = (m.values @ code.g_oi.values + code.b.values) % code.q
    return (a_all @ code.g_i.values + base) % code.q


def sample_uniform_matrix(q: int, r: int, n: int, rng: np.random.Generator) -> FieldMatrix:
    """Matrix with iid uniform entries; deterministic for a seeded generator."""
    PrimeField(q)
    return FieldMatrix(q, rng.integers(0, q, size=(r, n), dtype=np.int64))


def sample_uniform_vector(q: int, n: int, rng: np.random.Generator) -> FieldVector:
    PrimeField(q)
    return FieldVector(q, rng.integers(0, q, size=n, dtype=np.int64))
