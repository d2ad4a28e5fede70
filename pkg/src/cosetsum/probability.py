"""Discrete probability tables, information functionals and robust typicality.

All information quantities are in bits. Probabilities are double precision;
construction requires tables to sum to 1 within 1e-12, and identities are
tested elsewhere at 1e-9.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import AxisError, BudgetError, ValidationError

SUM_TOL = 1e-12
# Float guard on the inclusive typicality comparisons so that exact-boundary
# integer counts are classified deterministically.
TYP_EPS = 1e-9


def entropy_bits(table: np.ndarray) -> float:
    """Shannon entropy of an unnormalized-safe nonnegative table, 0 log 0 = 0."""
    p = np.asarray(table, dtype=float).ravel()
    p = p[p > 0.0]
    if p.size == 0:
        return 0.0
    return float(-(p * np.log2(p)).sum())


def _check_names(names):
    if len(set(names)) != len(names):
        raise AxisError(f"duplicate axis names in {names}")


@dataclass(frozen=True)
class JointPmf:
    """Dense joint pmf over a product of named finite alphabets."""

    axes: tuple[tuple[str, int], ...]
    table: np.ndarray

    def __post_init__(self):
        axes = tuple((str(n), int(s)) for n, s in self.axes)
        _check_names([n for n, _ in axes])
        t = np.asarray(self.table, dtype=float)
        shape = tuple(s for _, s in axes)
        if t.shape != shape:
            raise ValidationError(f"table shape {t.shape} does not match axes {axes}")
        if t.size and t.min() < 0.0:
            raise ValidationError("negative probability entry")
        if abs(t.sum() - 1.0) > SUM_TOL:
            raise ValidationError(f"table sums to {t.sum()!r}, not 1 within {SUM_TOL}")
        t = t.copy()
        t.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "table", t)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.axes)

    def size(self, name: str) -> int:
        return self.axes[self.axis_index(name)][1]

    def axis_index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.axes):
            if n == name:
                return i
        raise AxisError(f"unknown axis {name!r}; have {self.names}")

    def _indices(self, names) -> list[int]:
        names = [names] if isinstance(names, str) else list(names)
        if not names:
            raise AxisError("empty axis selection")
        return [self.axis_index(n) for n in names]

    def marginal(self, names) -> "JointPmf":
        """Marginal on the given axes, in the given order."""
        keep = self._indices(names)
        drop = tuple(i for i in range(len(self.axes)) if i not in keep)
        t = self.table.sum(axis=drop) if drop else self.table
        # sum() above leaves kept axes in table order; permute to request order
        order = [i for i in range(len(self.axes)) if i not in drop]
        perm = [order.index(i) for i in keep]
        return JointPmf(tuple(self.axes[i] for i in keep), np.transpose(t, perm))

    def marginal_array(self, names) -> np.ndarray:
        return self.marginal(names).table

    def entropy(self, names=None) -> float:
        """H(marginal on names) in bits; all axes when names is None."""
        if names is None:
            return entropy_bits(self.table)
        return entropy_bits(self.marginal(names).table)

    def conditional_entropy(self, target, given) -> float:
        """H(target | given) = H(target, given) - H(given)."""
        t = [target] if isinstance(target, str) else list(target)
        g = [given] if isinstance(given, str) else list(given)
        if set(t) & set(g):
            raise AxisError(f"target {t} and given {g} overlap")
        return self.entropy(t + g) - self.entropy(g)

    def mutual_information(self, a, b) -> float:
        """I(a; b) >= 0 in bits (clamped at tiny negative float error)."""
        aa = [a] if isinstance(a, str) else list(a)
        bb = [b] if isinstance(b, str) else list(b)
        if set(aa) & set(bb):
            raise AxisError(f"axes {aa} and {bb} overlap")
        i = self.entropy(aa) + self.entropy(bb) - self.entropy(aa + bb)
        return max(0.0, i)

    def product(self, other: "JointPmf") -> "JointPmf":
        """Independent product; axis names must be disjoint."""
        if set(self.names) & set(other.names):
            raise AxisError("product requires disjoint axis names")
        t = np.multiply.outer(self.table, other.table)
        return JointPmf(self.axes + other.axes, t)

    def compose(self, channel: "ConditionalPmf") -> "JointPmf":
        """Extend with channel output axes drawn conditionally on given axes."""
        given = [self.axis_index(n) for n, _ in channel.given_axes]
        for (n, s) in channel.given_axes:
            if self.size(n) != s:
                raise AxisError(f"axis {n!r} has size {self.size(n)}, channel expects {s}")
        for (n, _) in channel.target_axes:
            if n in self.names:
                raise AxisError(f"output axis {n!r} already present")
        nin = len(self.axes)
        letters = [chr(ord("a") + i) for i in range(nin)]
        out_letters = [chr(ord("a") + nin + i) for i in range(len(channel.target_axes))]
        sub_in = "".join(letters)
        sub_ch = "".join(letters[i] for i in given) + "".join(out_letters)
        sub_out = sub_in + "".join(out_letters)
        t = np.einsum(f"{sub_in},{sub_ch}->{sub_out}", self.table, channel.table)
        return JointPmf(self.axes + channel.target_axes, t)

    def pushforward(self, names, func, new_name: str, new_size: int) -> "JointPmf":
        """Append a deterministic axis new_name = func(values of names)."""
        idxs = self._indices(names)
        shapes = [self.axes[i][1] for i in idxs]
        fmap = np.empty(shapes, dtype=np.int64)
        for coords in itertools.product(*[range(s) for s in shapes]):
            val = int(func(*coords))
            if not 0 <= val < new_size:
                raise ValidationError(f"pushforward value {val} outside [0, {new_size})")
            fmap[coords] = val
        # fmap axes follow the order of `names`; realign to table-axis order
        # and broadcast across the full table shape.
        fmap_t = np.transpose(fmap, np.argsort(idxs)) if len(idxs) > 1 else fmap
        fbro = fmap_t.reshape(
            [self.axes[i][1] if i in idxs else 1 for i in range(len(self.axes))]
        )
        full = np.zeros(self.table.shape + (new_size,), dtype=float)
        for w in range(new_size):
            full[..., w] = self.table * (fbro == w)
        return JointPmf(self.axes + ((new_name, new_size),), full)

    def conditional(self, target, given) -> "ConditionalPmf":
        """Conditional pmf of target given given; zero-probability rows
        are filled uniformly (they never occur, but keep tables valid)."""
        t = [target] if isinstance(target, str) else list(target)
        g = [given] if isinstance(given, str) else list(given)
        joint = self.marginal(g + t)
        ng = len(g)
        gshape = joint.table.shape[:ng]
        tshape = joint.table.shape[ng:]
        flat = joint.table.reshape(int(np.prod(gshape)), int(np.prod(tshape)))
        sums = flat.sum(axis=1, keepdims=True)
        tsize = flat.shape[1]
        cond = np.where(sums > 0, flat / np.where(sums > 0, sums, 1.0), 1.0 / tsize)
        cond = cond.reshape(gshape + tshape)
        return ConditionalPmf(tuple(joint.axes[:ng]), tuple(joint.axes[ng:]), cond)


@dataclass(frozen=True)
class ConditionalPmf:
    """Conditional probability table target | given."""

    given_axes: tuple[tuple[str, int], ...]
    target_axes: tuple[tuple[str, int], ...]
    table: np.ndarray

    def __post_init__(self):
        ga = tuple((str(n), int(s)) for n, s in self.given_axes)
        ta = tuple((str(n), int(s)) for n, s in self.target_axes)
        _check_names([n for n, _ in ga + ta])
        t = np.asarray(self.table, dtype=float)
        shape = tuple(s for _, s in ga) + tuple(s for _, s in ta)
        if t.shape != shape:
            raise ValidationError(f"table shape {t.shape} does not match axes {shape}")
        if t.size and t.min() < 0.0:
            raise ValidationError("negative conditional probability")
        tdims = tuple(range(len(ga), len(ga) + len(ta)))
        sums = t.sum(axis=tdims)
        if not np.allclose(sums, 1.0, rtol=0.0, atol=SUM_TOL):
            bad = np.unravel_index(int(np.argmax(np.abs(sums - 1.0))), sums.shape)
            raise ValidationError(
                f"conditional slice {bad} sums to {float(sums[bad])!r}, not 1 within {SUM_TOL}"
            )
        t = t.copy()
        t.flags.writeable = False
        object.__setattr__(self, "given_axes", ga)
        object.__setattr__(self, "target_axes", ta)
        object.__setattr__(self, "table", t)


# ---------------------------------------------------------------------------
# Robust (multiplicative) typicality
# ---------------------------------------------------------------------------


def empirical_counts(seqs, sizes) -> np.ndarray:
    """Joint symbol counts of parallel sequences; shape = sizes."""
    seqs = [np.asarray(s, dtype=np.int64) for s in seqs]
    n = len(seqs[0])
    for s in seqs:
        if len(s) != n:
            raise ValidationError("sequences must have equal length")
    counts = np.zeros(tuple(sizes), dtype=np.int64)
    np.add.at(counts, tuple(seqs), 1)
    return counts


def typicality_bounds(p: np.ndarray, n: int, eta: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell inclusive count bounds for the robust typical set.

    A sequence is typical iff every cell count c satisfies
    |c - n p| <= eta * n * p, and c = 0 wherever p = 0.
    """
    p = np.asarray(p, dtype=float)
    lo = n * p * (1.0 - eta) - TYP_EPS
    hi = n * p * (1.0 + eta) + TYP_EPS
    zero = p <= 0.0
    lo = np.where(zero, -TYP_EPS, lo)
    hi = np.where(zero, TYP_EPS, hi)
    return lo, hi


def counts_typical(counts: np.ndarray, p: np.ndarray, eta: float) -> bool:
    n = int(counts.sum())
    lo, hi = typicality_bounds(p, n, eta)
    return bool(np.all((counts >= lo) & (counts <= hi)))


def is_typical(seq, p, eta: float) -> bool:
    """Robust typicality of a single sequence against a 1-D pmf.

    `p` may be a plain array or a single-axis JointPmf.
    """
    if isinstance(p, JointPmf):
        if len(p.axes) != 1:
            raise AxisError("is_typical expects a single-axis pmf; use is_jointly_typical")
        p = p.table
    p = np.asarray(p, dtype=float)
    seq = np.asarray(getattr(seq, "values", seq), dtype=np.int64)
    if seq.size and (seq.min() < 0 or seq.max() >= len(p)):
        return False
    counts = empirical_counts([seq], [len(p)])
    return counts_typical(counts, p, eta)


def is_jointly_typical(seqs, p: JointPmf, eta: float) -> bool:
    """Robust joint typicality of parallel sequences against a JointPmf."""
    seqs = [np.asarray(getattr(s, "values", s), dtype=np.int64) for s in seqs]
    if len(seqs) != len(p.axes):
        raise AxisError(f"{len(seqs)} sequences for {len(p.axes)} axes")
    for s, (_, size) in zip(seqs, p.axes):
        if s.size and (s.min() < 0 or s.max() >= size):
            return False
    counts = empirical_counts(seqs, [s for _, s in p.axes])
    return counts_typical(counts, p.table, eta)


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative ints summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def typical_set_size(p, n: int, eta: float, budget_bits: int = 26) -> int:
    """Exact number of length-n sequences in the robust typical set of p.

    Counts by enumerating types (count vectors) and summing exact multinomial
    coefficients, which agrees with brute-force sequence enumeration.
    """
    if isinstance(p, JointPmf):
        p = p.table
    p = np.asarray(p, dtype=float).ravel()
    m = len(p)
    if n * math.log2(m) > budget_bits:
        raise BudgetError(f"{m}^{n} sequences exceed the {budget_bits}-bit budget")
    lo, hi = typicality_bounds(p, n, eta)
    total = 0
    for counts in _compositions(n, m):
        c = np.asarray(counts)
        if np.all((c >= lo) & (c <= hi)):
            coef = math.factorial(n)
            for ci in counts:
                coef //= math.factorial(ci)
            total += coef
    return total
