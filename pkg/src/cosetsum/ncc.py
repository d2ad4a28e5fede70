"""Nested coset channel code: construction, typicality encoding, sum decoding.

Both encoders share the generator matrices and differ only in their bias
vectors; the decoder works in the code whose bias is the sum of the two.
Because the codes are closed under addition, the sum of any two transmitted
codewords is itself a decoder codeword, indexed by the sum of the messages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DecodeFailure, DimensionError, EncoderFailure, ValidationError
from .galois import (
    DEFAULT_ENUM_BUDGET_BITS,
    FieldMatrix,
    FieldVector,
    all_tuples,
    check_enum_budget,
    codeword as _codeword,
    coset_matrix,
    enumerate_coset as _enumerate_coset,
    index_tuple,
    sample_uniform_matrix,
    sample_uniform_vector,
)
from .kernels import typical_mask
from .model import Mac, SourcePair, TestChannel, normalize_instance
from .probability import JointPmf, is_typical, typicality_bounds
from .regions import composed_joint


@dataclass(frozen=True)
class NestedCosetCode:
    """(n, k, l, g_i, g_oi, b): inner code rows g_i, coset rows g_oi, bias b."""

    n: int
    k: int
    l: int
    q: int
    g_i: FieldMatrix
    g_oi: FieldMatrix
    b: FieldVector

    def __post_init__(self):
        if self.g_i.values.shape != (self.k, self.n):
            raise DimensionError(f"g_i must be {self.k}x{self.n}")
        if self.g_oi.values.shape != (self.l, self.n):
            raise DimensionError(f"g_oi must be {self.l}x{self.n}")
        if len(self.b) != self.n:
            raise DimensionError(f"bias must have length {self.n}")
        if not (self.g_i.q == self.g_oi.q == self.b.q == self.q):
            raise DimensionError("component moduli disagree")

    def codeword(self, a: FieldVector, m: FieldVector) -> FieldVector:
        return _codeword(self, a, m)

    def enumerate_coset(self, m: FieldVector, budget_bits: int = DEFAULT_ENUM_BUDGET_BITS):
        return _enumerate_coset(self, m, budget_bits)

    def coset_matrix(self, m: FieldVector, budget_bits: int = DEFAULT_ENUM_BUDGET_BITS):
        return coset_matrix(self, m, budget_bits)

    def codebook(self, budget_bits: int = DEFAULT_ENUM_BUDGET_BITS) -> np.ndarray:
        """All q^(k+l) codewords; row index = m_rank * q^k + a_rank."""
        cached = getattr(self, "_codebook", None)
        if cached is not None:
            return cached
        check_enum_budget(self.q, self.k + self.l, budget_bits)
        tuples = all_tuples(self.q, self.l + self.k)
        cb = (
            tuples[:, : self.l] @ self.g_oi.values
            + tuples[:, self.l :] @ self.g_i.values
            + self.b.values
        ) % self.q
        cb.flags.writeable = False
        object.__setattr__(self, "_codebook", cb)
        return cb


@dataclass(frozen=True)
class CodePair:
    """Shared generators with per-user biases; decoder bias is their sum."""

    g_i: FieldMatrix
    g_oi: FieldMatrix
    b1: FieldVector
    b2: FieldVector

    @property
    def q(self) -> int:
        return self.g_i.q

    @property
    def n(self) -> int:
        return self.g_i.cols

    @property
    def k(self) -> int:
        return self.g_i.rows

    @property
    def l(self) -> int:
        return self.g_oi.rows

    def _memo(self, key: str, bias: FieldVector) -> NestedCosetCode:
        # cache the code objects so their codebooks persist across trials
        cache = getattr(self, "_codes", None)
        if cache is None:
            cache = {}
            object.__setattr__(self, "_codes", cache)
        if key not in cache:
            cache[key] = NestedCosetCode(self.n, self.k, self.l, self.q, self.g_i, self.g_oi, bias)
        return cache[key]

    def encoder_code(self, user: int) -> NestedCosetCode:
        if user not in (1, 2):
            raise ValidationError(f"user must be 1 or 2, got {user}")
        return self._memo(f"enc{user}", self.b1 if user == 1 else self.b2)

    def decoder_code(self) -> NestedCosetCode:
        return self._memo("dec", self.b1 + self.b2)


def ncc_build(n: int, k: int, l: int, q: int, rng: np.random.Generator) -> CodePair:
    """Sample generators and biases independently and uniformly."""
    g_i = sample_uniform_matrix(q, k, n, rng)
    g_oi = sample_uniform_matrix(q, l, n, rng)
    b1 = sample_uniform_vector(q, n, rng)
    b2 = sample_uniform_vector(q, n, rng)
    return CodePair(g_i, g_oi, b1, b2)


# ---------------------------------------------------------------------------
# Rate-parameter validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateCheck:
    holds: bool
    slack: float  # base-q symbols per channel symbol; negative when violated


@dataclass(frozen=True)
class RateFeasibilityReport:
    """Binning-rate conditions for an (n, k, l) code on a given test channel.

    inner_ok:   k/n large enough that each coset holds a typical codeword.
    outer_ok:   (k+l)/n small enough for the sum codebook to stay sparse.
    combined_ok: l/n below the achievable computation rate (needs a MAC).
    All slacks are in base-q units.
    """

    inner: RateCheck
    outer: RateCheck
    combined: RateCheck | None


def ncc_validate_rates(
    n: int,
    k: int,
    l: int,
    q: int,
    tc: TestChannel,
    src: SourcePair,
    mac: Mac | None = None,
) -> RateFeasibilityReport:
    _, ntc = normalize_instance(src, tc)
    logq = np.log2(q)
    h1 = ntc.p1.entropy("v1") / logq
    h2 = ntc.p2.entropy("v2") / logq
    hmin = min(h1, h2)
    joint_v = ntc.p1.marginal("v1").product(ntc.p2.marginal("v2"))
    pz = joint_v.pushforward(["v1", "v2"], lambda a, b: (a + b) % q, "z", q)
    hz = pz.entropy("z") / logq
    inner = RateCheck(k / n >= 1.0 - hmin - 1e-12, k / n - (1.0 - hmin))
    outer = RateCheck((k + l) / n <= 1.0 - hz + 1e-12, (1.0 - hz) - (k + l) / n)
    combined = None
    if mac is not None:
        joint = composed_joint(src, mac, tc)
        hzy = joint.conditional_entropy("z", "y") / logq
        combined = RateCheck(l / n < hmin - hzy, (hmin - hzy) - l / n)
    return RateFeasibilityReport(inner, outer, combined)


def theoretical_error_bound(n: int, k: int, l: int, q: int, h_zy_bits: float, eta1: float) -> float:
    """Ensemble bound on the wrong-coset-listing probability, clamped to [0,1].

    q ** (-n * (1 - (k+l)/n - H_q - 3*eta1)) with H_q the conditional entropy
    of the codeword sum given the output, in base-q units.
    """
    h_q = h_zy_bits / np.log2(q)
    exponent = 1.0 - (k + l) / n - h_q - 3.0 * eta1
    return float(min(1.0, q ** (-n * exponent)))


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EncoderConfig:
    """Per-user typicality encoder parameters."""

    p_v: np.ndarray  # (q,) codeword-symbol law
    p_x_given_v: np.ndarray  # (q, x_size) conditional input law
    eta2: float

    @classmethod
    def from_test_channel(cls, tc: TestChannel, user: int, eta2: float) -> "EncoderConfig":
        p = tc.p1 if user == 1 else tc.p2
        vax, xax = p.names
        p_v = p.marginal_array(vax)
        cond = p.conditional(xax, vax).table
        return cls(p_v, cond, eta2)


@dataclass(frozen=True)
class EncoderResult:
    v: FieldVector
    x: np.ndarray  # channel-input indices, length n
    a_rank: int  # lexicographic rank of the chosen inner index


def _sample_rows(cond: np.ndarray, rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one symbol per position t from cond[rows[t], :]."""
    cdf = np.cumsum(cond, axis=1)
    u = rng.random(len(rows))
    return (u[:, None] > cdf[rows]).sum(axis=1)


def ncc_encode(
    pair: CodePair,
    user: int,
    m: FieldVector,
    cfg: EncoderConfig,
    rng: np.random.Generator,
    budget_bits: int = DEFAULT_ENUM_BUDGET_BITS,
) -> EncoderResult | EncoderFailure:
    """Pick a typical codeword of the indexed coset uniformly at random, then
    generate the channel input memorylessly from it."""
    code = pair.encoder_code(user)
    if len(m) != code.l:
        raise DimensionError(f"message has length {len(m)}, code expects l={code.l}")
    if len(cfg.p_v) != code.q:
        raise ValidationError("encoder p_v does not match the code field")
    # slice the cached full codebook when it is small enough; otherwise
    # materialize just the requested coset
    if (code.k + code.l) * np.log2(code.q) <= min(20, budget_bits):
        from .galois import tuple_index

        m_rank = tuple_index(m.values, code.q)
        size = code.q**code.k
        coset = code.codebook(budget_bits=budget_bits)[m_rank * size : (m_rank + 1) * size]
    else:
        coset = code.coset_matrix(m, budget_bits=budget_bits)
    lo, hi = typicality_bounds(cfg.p_v, code.n, cfg.eta2)
    mask = typical_mask(coset, np.zeros(code.n, dtype=np.int64), code.q, 1,
                        lo[:, None], hi[:, None])
    hits = np.flatnonzero(mask)
    if len(hits) == 0:
        return EncoderFailure(user=user)
    a_rank = int(hits[rng.integers(len(hits))])
    v = coset[a_rank]
    x = _sample_rows(cfg.p_x_given_v, v, rng)
    return EncoderResult(v=FieldVector(code.q, v), x=x, a_rank=a_rank)


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecodeSuccess:
    m: FieldVector
    cosets: frozenset
    list_size: int

    def __bool__(self) -> bool:
        return True


def ncc_decode(
    pair: CodePair,
    y: np.ndarray,
    pzy: JointPmf,
    eta1: float,
    budget_bits: int = DEFAULT_ENUM_BUDGET_BITS,
) -> DecodeSuccess | DecodeFailure:
    """Joint-typicality list decoding of the message sum.

    Declares failure when y itself is atypical (tolerance eta1/2), when no
    codeword is jointly typical with y (tolerance eta1), or when the typical
    list spans more than one coset. The listed coset ranks are reported on
    every path that reaches the list stage, so callers can classify
    wrong-coset events.
    """
    if pzy.names != ("z", "y"):
        raise ValidationError(f"pzy axes must be ('z','y'), got {pzy.names}")
    q, y_size = pzy.axes[0][1], pzy.axes[1][1]
    if q != pair.q:
        raise ValidationError("pzy field size does not match the code")
    y = np.asarray(getattr(y, "values", y), dtype=np.int64)
    if len(y) != pair.n:
        raise DimensionError(f"received block has length {len(y)}, code expects {pair.n}")
    if not is_typical(y, pzy.marginal_array("y"), eta1 / 2.0):
        return DecodeFailure(reason="y_atypical")
    code = pair.decoder_code()
    cb = code.codebook(budget_bits=budget_bits)
    lo, hi = typicality_bounds(pzy.table, pair.n, eta1)
    mask = typical_mask(cb, y, q, y_size, lo, hi)
    hits = np.flatnonzero(mask)
    if len(hits) == 0:
        return DecodeFailure(reason="no_typical_codeword")
    coset_ranks = frozenset(int(r) for r in np.unique(hits // (q**pair.k)))
    if len(coset_ranks) > 1:
        return DecodeFailure(reason="multi_coset", cosets=coset_ranks)
    (rank,) = coset_ranks
    m = FieldVector(q, index_tuple(rank, q, pair.l))
    return DecodeSuccess(m=m, cosets=coset_ranks, list_size=len(hits))
