"""Rate computations: achievable computation rate, baselines, two-layer regions.

All constants are in bits. Conversions to base-q units happen only in the
nested-coset parameter checks (see the ncc module).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, NotSupportedError, ValidationError
from .model import (
    LayeredChannelTest,
    LayeredSourceTest,
    Mac,
    SourcePair,
    TestChannel,
    normalize_instance,
)
from .probability import JointPmf, entropy_bits

INTERSECT_TOL = 1e-9


# ---------------------------------------------------------------------------
# Single-test-channel computation rate
# ---------------------------------------------------------------------------


def composed_joint(src: SourcePair, mac: Mac, tc: TestChannel) -> JointPmf:
    """Joint law over (v1, x1, v2, x2, y, z) with z = v1 + v2 after
    coefficient normalization."""
    nsrc, ntc = normalize_instance(src, tc)
    q = nsrc.q
    if ntc.q != q:
        raise ValidationError(f"test channel V alphabet {ntc.q} does not match source field {q}")
    if ntc.p1.size("x1") != mac.x1_size or ntc.p2.size("x2") != mac.x2_size:
        raise ValidationError("test channel X alphabets do not match the MAC")
    joint = ntc.joint().compose(mac.w)
    return joint.pushforward(["v1", "v2"], lambda v1, v2: (v1 + v2) % q, "z", q)


def alpha_details(src: SourcePair, mac: Mac, tc: TestChannel) -> dict:
    joint = composed_joint(src, mac, tc)
    h1 = joint.entropy("v1")
    h2 = joint.entropy("v2")
    hzy = joint.conditional_entropy("z", "y")
    return {
        "h_v1_bits": h1,
        "h_v2_bits": h2,
        "h_min_bits": min(h1, h2),
        "h_z_given_y_bits": hzy,
        "alpha_bits": max(0.0, min(h1, h2) - hzy),
    }


def alpha_rate(src: SourcePair, mac: Mac, tc: TestChannel) -> float:
    """max(0, min(H(V1), H(V2)) - H(V1+V2 | Y)) in bits."""
    return alpha_details(src, mac, tc)["alpha_bits"]


def computation_lambda(src: SourcePair, rate_bits: float) -> float:
    """Source symbols computable per channel use: rate / H(Z).

    H(Z) = 0 means any rate is achievable; returns math.inf in that case.
    """
    hz = src.sum_entropy()
    if hz <= 0.0:
        return math.inf
    return rate_bits / hz


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------


def lcc_rate(mac: Mac, q: int) -> float | None:
    """Symmetric rate of same-linear-code signaling, or None when the MAC is
    not additive over F_q (output law not a function of x1 + x2)."""
    if mac.x1_size != q or mac.x2_size != q:
        raise ValidationError("linear signaling needs both input alphabets equal to F_q")
    ref = np.empty((q, mac.y_size))
    for w in range(q):
        ref[w] = mac.table[w, 0]
    for x1 in range(q):
        for x2 in range(q):
            if not np.allclose(mac.table[x1, x2], ref[(x1 + x2) % q], rtol=0.0, atol=1e-12):
                return None
    joint = ref / q
    return entropy_bits(joint.sum(axis=0)) + entropy_bits(joint.sum(axis=1)) - entropy_bits(joint)


def _subset_uniform_pmfs(size: int) -> np.ndarray:
    """Uniform distributions on every nonempty subset (includes point masses)."""
    rows = []
    for mask in range(1, 1 << size):
        row = np.array([(mask >> i) & 1 for i in range(size)], dtype=float)
        rows.append(row / row.sum())
    return np.array(rows)


def simplex_grid(resolution: int, dim: int, budget: int = 2_000_000) -> np.ndarray:
    """All pmfs on `dim` outcomes with entries that are multiples of 1/resolution."""
    count = math.comb(resolution + dim - 1, dim - 1)
    if count > budget:
        raise BudgetError(f"simplex grid of {count} points exceeds budget {budget}")
    rows = np.empty((count, dim))
    for i, cuts in enumerate(itertools.combinations(range(resolution + dim - 1), dim - 1)):
        prev = -1
        for j, c in enumerate(cuts):
            rows[i, j] = c - prev - 1
            prev = c
        rows[i, dim - 1] = resolution + dim - 2 - prev
    return rows / resolution


def _batched_sum_information(p1s: np.ndarray, p2s: np.ndarray, w: np.ndarray,
                             chunk: int = 256) -> tuple[float, int, int]:
    """Max of I(X1,X2; Y) over all (row of p1s) x (row of p2s) product inputs."""
    hrow = np.apply_along_axis(entropy_bits, 2, w)
    best, bi, bj = -1.0, 0, 0
    for start in range(0, len(p1s), chunk):
        block = p1s[start : start + chunk]
        hy_cond = block @ hrow @ p2s.T
        py = np.einsum("ax,xwy,bw->aby", block, w, p2s)
        with np.errstate(divide="ignore", invalid="ignore"):
            hy = -np.where(py > 0, py * np.log2(py), 0.0).sum(axis=2)
        i_ab = hy - hy_cond
        k = int(np.argmax(i_ab))
        a, b = divmod(k, i_ab.shape[1])
        if i_ab[a, b] > best:
            best, bi, bj = float(i_ab[a, b]), start + a, b
    return best, bi, bj


def sum_capacity_product(mac: Mac, grid: int = 16):
    """Grid lower bound on max I(X1,X2;Y) over independent inputs.

    The search family is the simplex grid at the given resolution plus all
    subset-uniform inputs (which include every deterministic input).
    """
    if grid < 2:
        raise ValidationError("grid resolution must be at least 2")
    cands = []
    for nx in (mac.x1_size, mac.x2_size):
        cands.append(np.vstack([simplex_grid(grid, nx), _subset_uniform_pmfs(nx)]))
    best, bi, bj = _batched_sum_information(cands[0], cands[1], mac.table)
    return best, (cands[0][bi], cands[1][bj])


def separation_lambda(src: SourcePair, mac: Mac, grid: int = 16) -> float:
    """Computed separation baseline: product-input sum capacity over the
    source entropy budget H(S1) + H(S2)."""
    if not src.is_independent():
        raise NotSupportedError("separation baseline supports independent sources only")
    c_sum, _ = sum_capacity_product(mac, grid)
    h1 = src.joint.entropy("s1")
    h2 = src.joint.entropy("s2")
    return c_sum / (h1 + h2)


def separation_lambda_cap(src: SourcePair, mac: Mac) -> float:
    """Output-cardinality accounting of the separation baseline, as used in
    the published worked examples: log2 |Y| / (H(S1) + H(S2)).

    This is an upper bound on any separation scheme and can exceed the
    computed value from `separation_lambda` on noisy channels.
    """
    if not src.is_independent():
        raise NotSupportedError("separation baseline supports independent sources only")
    h1 = src.joint.entropy("s1")
    h2 = src.joint.entropy("s2")
    return math.log2(mac.y_size) / (h1 + h2)


# ---------------------------------------------------------------------------
# Supremum search over test channels (explicit lower bound)
# ---------------------------------------------------------------------------


def _alpha_batch_vchannel(p1s: np.ndarray, p2s: np.ndarray, wv: np.ndarray, q: int):
    """alpha for every pair of V-marginals under a fixed V-level channel
    wv[v1, v2, y]; returns (alpha matrix, H(V) vectors)."""
    ny = wv.shape[2]
    with np.errstate(divide="ignore", invalid="ignore"):
        h1 = -np.where(p1s > 0, p1s * np.log2(p1s), 0.0).sum(axis=1)
        h2 = -np.where(p2s > 0, p2s * np.log2(p2s), 0.0).sum(axis=1)
    # g[v1, z, b, y] = p2s[b, (z - v1) mod q] * wv[v1, (z - v1) mod q, y]
    g = np.empty((q, q, len(p2s), ny))
    for v1 in range(q):
        for z in range(q):
            v2 = (z - v1) % q
            g[v1, z] = np.outer(p2s[:, v2], wv[v1, v2])
    t = np.einsum("av,vzby->abzy", p1s, g)
    with np.errstate(divide="ignore", invalid="ignore"):
        hzy_joint = -np.where(t > 0, t * np.log2(t), 0.0).sum(axis=(2, 3))
        py = t.sum(axis=2)
        hy = -np.where(py > 0, py * np.log2(py), 0.0).sum(axis=2)
    alpha = np.minimum(h1[:, None], h2[None, :]) - (hzy_joint - hy)
    return np.maximum(alpha, 0.0), h1, h2


def _deterministic_maps(q: int, nx: int, cap: int = 512) -> np.ndarray:
    """Candidate deterministic maps F_q -> X as rows of length q."""
    if nx**q <= cap:
        from .galois import all_tuples

        return all_tuples(nx, q)
    if nx >= q:
        rows = [np.array(p, dtype=np.int64) for p in itertools.permutations(range(nx), q)]
        rows += [np.full(q, x, dtype=np.int64) for x in range(nx)]
        if len(rows) > 4 * cap:
            # keep injections seeded from distinct offsets plus constants
            rows = rows[: 4 * cap]
        return np.array(rows)
    raise BudgetError(f"no tractable deterministic map family for q={q}, |X|={nx}")


def _tc_from_map(q: int, nx1: int, nx2: int, p1, f1, p2, f2) -> TestChannel:
    t1 = np.zeros((q, nx1))
    t2 = np.zeros((q, nx2))
    for v in range(q):
        t1[v, int(f1[v])] = p1[v]
        t2[v, int(f2[v])] = p2[v]
    return TestChannel(
        JointPmf((("v1", q), ("x1", nx1)), t1),
        JointPmf((("v2", q), ("x2", nx2)), t2),
    )


def alpha_sup(
    src: SourcePair,
    mac: Mac,
    *,
    deterministic_maps_only: bool = True,
    grid: int = 16,
    pairing: str = "auto",
    joint_grid: int = 4,
    refine_top: int = 6,
    refine_rounds: int = 3,
    budget: int = 5_000_000,
):
    """Search lower bound on the supremum of alpha over test channels.

    deterministic-map mode searches pairs (p_Vj, fj: V -> X deterministic):
    subset-uniform seeds for every map pair, then alternating simplex-grid
    ascent at the given resolution around the best candidates. The result is
    a lower bound on the true supremum; a larger family or finer grid can
    only improve it.

    With deterministic_maps_only=False the search instead grids the joint
    p(v, x) tables directly at resolution `joint_grid` (coarse oracle mode).

    Returns (alpha_bits, best TestChannel).
    """
    nsrc, _ = normalize_instance(src, None)
    q = nsrc.q
    nx1, nx2, w = mac.x1_size, mac.x2_size, mac.table

    if not deterministic_maps_only:
        g1 = simplex_grid(joint_grid, q * nx1)
        g2 = simplex_grid(joint_grid, q * nx2)
        if len(g1) * len(g2) > budget:
            raise BudgetError(f"joint grid search of {len(g1) * len(g2)} pairs exceeds budget")
        t1s = g1.reshape(-1, q, nx1)
        t2s = g2.reshape(-1, q, nx2)
        best, arg = -1.0, None
        u1 = np.einsum("avx,xwy->avwy", t1s, w)
        pv1 = t1s.sum(axis=2)
        with np.errstate(divide="ignore", invalid="ignore"):
            h1 = -np.where(pv1 > 0, pv1 * np.log2(np.where(pv1 > 0, pv1, 1.0)), 0.0).sum(axis=1)
        for t2 in t2s:
            p2z = np.empty((q, q, nx2))
            for v1 in range(q):
                for z in range(q):
                    p2z[v1, z] = t2[(z - v1) % q]
            t = np.einsum("avwy,vzw->azy", u1, p2z)
            with np.errstate(divide="ignore", invalid="ignore"):
                hj = -np.where(t > 0, t * np.log2(t), 0.0).sum(axis=(1, 2))
                py = t.sum(axis=1)
                hy = -np.where(py > 0, py * np.log2(py), 0.0).sum(axis=1)
            h2 = entropy_bits(t2.sum(axis=1))
            al = np.maximum(np.minimum(h1, h2) - (hj - hy), 0.0)
            a = int(np.argmax(al))
            if al[a] > best:
                best = float(al[a])
                arg = (t1s[a].copy(), t2.copy())
        tc = TestChannel(
            JointPmf((("v1", q), ("x1", nx1)), arg[0]),
            JointPmf((("v2", q), ("x2", nx2)), arg[1]),
        )
        return best, tc

    maps1 = _deterministic_maps(q, nx1)
    maps2 = _deterministic_maps(q, nx2)
    if pairing == "auto":
        pairing = "full" if len(maps1) * len(maps2) <= 1024 else "symmetric"
    if pairing == "full":
        pairs = [(f1, f2) for f1 in maps1 for f2 in maps2]
    elif pairing == "symmetric":
        if nx1 != nx2:
            raise ValidationError("symmetric map pairing needs equal input alphabets")
        pairs = [(f, f) for f in maps1]
    else:
        raise ValidationError(f"unknown pairing {pairing!r}")

    seeds = _subset_uniform_pmfs(q)
    planned = len(pairs) * len(seeds) ** 2
    if planned > budget:
        raise BudgetError(f"map-pair search of {planned} evaluations exceeds budget {budget}")

    candidates = []  # (alpha, f1, f2, p1, p2)
    for f1, f2 in pairs:
        wv = w[np.ix_(f1, f2)]  # wv[v1, v2, y]
        al, _, _ = _alpha_batch_vchannel(seeds, seeds, wv, q)
        k = int(np.argmax(al))
        a, b = divmod(k, al.shape[1])
        candidates.append((float(al[a, b]), f1, f2, seeds[a].copy(), seeds[b].copy()))
    candidates.sort(key=lambda c: -c[0])

    scan = np.vstack([simplex_grid(grid, q), seeds])
    best = candidates[0]
    for cand in candidates[:refine_top]:
        alpha, f1, f2, p1, p2 = cand
        wv = w[np.ix_(f1, f2)]
        for _ in range(refine_rounds):
            al, _, _ = _alpha_batch_vchannel(scan, p2[None, :], wv, q)
            a = int(np.argmax(al[:, 0]))
            if al[a, 0] >= alpha:
                alpha, p1 = float(al[a, 0]), scan[a].copy()
            al, _, _ = _alpha_batch_vchannel(p1[None, :], scan, wv, q)
            b = int(np.argmax(al[0]))
            if al[0, b] >= alpha:
                alpha, p2 = float(al[0, b]), scan[b].copy()
        if alpha > best[0]:
            best = (alpha, f1, f2, p1, p2)
    alpha, f1, f2, p1, p2 = best
    return alpha, _tc_from_map(q, nx1, nx2, p1, f1, p2, f2)


# ---------------------------------------------------------------------------
# Two-layer regions in (R11, R12, R2)
# ---------------------------------------------------------------------------

_NONNEG = (
    ((1, 0, 0), ">=", 0.0),
    ((0, 1, 0), ">=", 0.0),
    ((0, 0, 1), ">=", 0.0),
)


@dataclass(frozen=True)
class RateRegion3:
    """Linear-inequality region in (R11, R12, R2); constants in bits.

    Nonnegativity of all three rates is always part of the region.
    """

    inequalities: tuple
    tag: str = ""

    def __post_init__(self):
        ineqs = []
        for coeffs, sense, const in tuple(self.inequalities) + _NONNEG:
            coeffs = tuple(int(c) for c in coeffs)
            if len(coeffs) != 3 or any(c not in (0, 1) for c in coeffs):
                raise ValidationError(f"coefficients must be 0/1 triples, got {coeffs}")
            if sense not in ("<=", ">="):
                raise ValidationError(f"bad sense {sense!r}")
            item = (coeffs, sense, float(const))
            if item not in ineqs:
                ineqs.append(item)
        object.__setattr__(self, "inequalities", tuple(ineqs))

    def scaled(self, factor: float) -> "RateRegion3":
        """Scale all constants (e.g. per-symbol source rates to per-use)."""
        return RateRegion3(
            tuple((c, s, const * factor) for c, s, const in self.inequalities),
            tag=self.tag,
        )

    def contains(self, point, tol: float = INTERSECT_TOL) -> bool:
        r = np.asarray(point, dtype=float)
        for coeffs, sense, const in self.inequalities:
            val = float(np.dot(coeffs, r))
            if sense == "<=" and val > const + tol:
                return False
            if sense == ">=" and val < const - tol:
                return False
        return True

    def describe(self) -> list[str]:
        names = ("R11", "R12", "R2")
        lines = []
        for coeffs, sense, const in self.inequalities:
            lhs = " + ".join(n for c, n in zip(coeffs, names) if c)
            lines.append(f"{lhs} {sense} {const:.6f}")
        return lines


def _cond_mi(p: JointPmf, a, b, c) -> float:
    """I(a; b | c) in bits."""
    a = [a] if isinstance(a, str) else list(a)
    b = [b] if isinstance(b, str) else list(b)
    c = [c] if isinstance(c, str) else list(c)
    return (
        p.entropy(a + c) + p.entropy(b + c) - p.entropy(c) - p.entropy(a + b + c)
        if c
        else p.mutual_information(a, b)
    )


def beta_s(lt: LayeredSourceTest) -> RateRegion3:
    """Source-side region: lower bounds on (R11, R12, R2) per source symbol."""
    q = lt.p.size("s1")
    p = lt.p.pushforward(["s1", "s2"], lambda s1, s2: (s1 + s2) % q, "z", q)
    return RateRegion3(
        (
            ((1, 0, 0), ">=", _cond_mi(p, "t1", "s1", "t2")),
            ((0, 1, 0), ">=", _cond_mi(p, "t2", "s2", "t1")),
            ((0, 0, 1), ">=", p.conditional_entropy("z", ["t1", "t2"])),
            ((1, 1, 0), ">=", p.mutual_information(["t1", "t2"], ["s1", "s2"])),
        ),
        tag="source",
    )


def beta_c(ct: LayeredChannelTest, mac: Mac) -> RateRegion3:
    """Channel-side region: upper bounds on (R11, R12, R2) per channel use."""
    if ct.p1.size("x1") != mac.x1_size or ct.p2.size("x2") != mac.x2_size:
        raise ValidationError("layered channel test does not match the MAC alphabets")
    q = ct.q
    p = ct.joint().compose(mac.w).pushforward(["v1", "v2"], lambda a, b: (a + b) % q, "z", q)
    hmin = min(p.conditional_entropy("v1", "u1"), p.conditional_entropy("v2", "u2"))
    hu1 = p.entropy("u1")
    hu2 = p.entropy("u2")
    return RateRegion3(
        (
            ((1, 0, 0), "<=", p.mutual_information("u1", ["y", "u2", "z"])),
            ((0, 1, 0), "<=", p.mutual_information("u2", ["y", "u1", "z"])),
            ((1, 1, 0), "<=", p.mutual_information(["u1", "u2"], ["y", "z"])),
            ((0, 0, 1), "<=", hmin - p.conditional_entropy("z", ["y", "u1", "u2"])),
            ((1, 0, 1), "<=", hmin + hu1 - p.conditional_entropy(["z", "u1"], ["y", "u2"])),
            ((0, 1, 1), "<=", hmin + hu2 - p.conditional_entropy(["z", "u2"], ["y", "u1"])),
            ((1, 1, 1), "<=", hmin + hu1 + hu2 - p.conditional_entropy(["z", "u1", "u2"], "y")),
        ),
        tag="channel",
    )


def regions_intersect(a: RateRegion3, b: RateRegion3, tol: float = INTERSECT_TOL):
    """Exact feasibility of the combined system by candidate-vertex enumeration.

    Every vertex of a nonempty feasible set (nonnegativity included) is the
    intersection of three independent active constraints, so checking all
    3-subsets of constraint boundaries decides feasibility exactly.

    Returns (feasible, witness_point_or_None).
    """
    constraints = []
    for coeffs, sense, const in a.inequalities + b.inequalities:
        item = (coeffs, sense, const)
        if item not in constraints:
            constraints.append(item)
    rows = [(np.asarray(c, dtype=float), s, k) for c, s, k in constraints]
    for trio in itertools.combinations(range(len(rows)), 3):
        mat = np.array([rows[i][0] for i in trio])
        rhs = np.array([rows[i][2] for i in trio])
        if abs(np.linalg.det(mat)) < 1e-12:
            continue
        point = np.linalg.solve(mat, rhs)
        ok = True
        for coeffs, sense, const in rows:
            val = float(coeffs @ point)
            if sense == "<=" and val > const + tol:
                ok = False
                break
            if sense == ">=" and val < const - tol:
                ok = False
                break
        if ok:
            return True, point
    return False, None


# ---------------------------------------------------------------------------
# Summary assembly
# ---------------------------------------------------------------------------


@dataclass
class RateSummary:
    """All headline numbers for one instance, in bits / dimensionless ratios."""

    alpha_bits: float | None
    ncc_lambda: float | None
    lcc_bits: float | None
    lcc_lambda: float | None
    separation_lambda: float
    separation_lambda_cap: float
    alpha_sup_bits: float | None = None
    details: dict = field(default_factory=dict)


def rate_summary(
    src: SourcePair,
    mac: Mac,
    tc: TestChannel | None,
    *,
    grid: int = 8,
    include_sup: bool = True,
    sup_kwargs: dict | None = None,
) -> RateSummary:
    lcc = lcc_rate(mac, src.q) if (mac.x1_size == src.q and mac.x2_size == src.q) else None
    lcc_lam = computation_lambda(src, lcc) if lcc is not None else None
    sep = separation_lambda(src, mac, grid=grid)
    sep_cap = separation_lambda_cap(src, mac)
    details: dict = {}
    alpha = ncc_lam = None
    if tc is not None:
        details.update(alpha_details(src, mac, tc))
        alpha = details["alpha_bits"]
        ncc_lam = computation_lambda(src, alpha)
    sup_bits = None
    if include_sup:
        sup_bits, sup_tc = alpha_sup(src, mac, grid=grid, **(sup_kwargs or {}))
        details["alpha_sup_lambda"] = computation_lambda(src, sup_bits)
    details["h_z_bits"] = src.sum_entropy()
    return RateSummary(
        alpha_bits=alpha,
        ncc_lambda=ncc_lam,
        lcc_bits=lcc,
        lcc_lambda=lcc_lam,
        separation_lambda=sep,
        separation_lambda_cap=sep_cap,
        alpha_sup_bits=sup_bits,
        details=details,
    )
