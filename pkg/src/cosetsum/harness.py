"""End-to-end Monte Carlo simulation and exact code-ensemble verification.

Every trial of the computation pipeline is classified into exactly one of
    ok, encoder_failure, y_atypical, no_typical_codeword, multi_coset,
    wrong_unique_coset, km_decode_error
and the wrong-coset-listing event (a competing coset appearing in the
decoder's typical list) is tracked separately so the ensemble bound can be
checked against exactly that event.
"""

from __future__ import annotations

import itertools
import json
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, DecodeFailure, EncoderFailure, ValidationError
from .galois import FieldVector, all_tuples, tuple_index
from .km import KmCode, km_encode, km_sum_decode
from .model import Mac, SourcePair, TestChannel, normalize_instance
from .ncc import EncoderConfig, ncc_build, ncc_decode, ncc_encode
from .regions import composed_joint

CATEGORIES = (
    "ok",
    "encoder_failure",
    "y_atypical",
    "no_typical_codeword",
    "multi_coset",
    "wrong_unique_coset",
    "km_decode_error",
)


def wilson_interval(errors: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class SimReport:
    params: dict
    trials: int
    counts: dict
    encoder_failures: tuple[int, int]
    epsilon3_count: int
    epsilon3_eligible: int
    km_decoded: bool

    @property
    def errors(self) -> int:
        return self.trials - self.counts["ok"]

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials if self.trials else 0.0

    @property
    def wilson(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.trials)

    @property
    def epsilon3_rate(self) -> float:
        if self.epsilon3_eligible == 0:
            return 0.0
        return self.epsilon3_count / self.epsilon3_eligible

    def as_dict(self) -> dict:
        lo, hi = self.wilson
        return {
            "params": self.params,
            "trials": self.trials,
            "counts": dict(self.counts),
            "encoder_failures": list(self.encoder_failures),
            "errors": self.errors,
            "error_rate": self.error_rate,
            "wilson95": [lo, hi],
            "epsilon3_count": self.epsilon3_count,
            "epsilon3_eligible": self.epsilon3_eligible,
            "epsilon3_rate": self.epsilon3_rate,
            "km_decoded": self.km_decoded,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)

    def table_lines(self) -> list[str]:
        lo, hi = self.wilson
        lines = [
            "trial classification        count",
            "-" * 34,
        ]
        for cat in CATEGORIES:
            lines.append(f"{cat:<27s} {self.counts[cat]:6d}")
        lines.append("-" * 34)
        lines.append(f"{'trials':<27s} {self.trials:6d}")
        lines.append(f"error rate  {self.error_rate:.6f}  (Wilson 95%: [{lo:.6f}, {hi:.6f}])")
        lines.append(
            f"wrong-coset listing rate {self.epsilon3_rate:.6f} "
            f"({self.epsilon3_count}/{self.epsilon3_eligible} eligible trials)"
        )
        return lines


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, 1, trial]))


def _sample_pairs(joint_flat_cdf: np.ndarray, q: int, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    u = rng.random(n)
    idx = (u[:, None] > joint_flat_cdf[None, :]).sum(axis=1)
    return idx // q, idx % q


def _sample_channel(w_cdf: np.ndarray, x1: np.ndarray, x2: np.ndarray, rng) -> np.ndarray:
    u = rng.random(len(x1))
    return (u[:, None] > w_cdf[x1, x2]).sum(axis=1)


def run_computation_trials(
    src: SourcePair,
    mac: Mac,
    tc: TestChannel,
    n: int,
    k: int,
    l: int,
    kmcode: KmCode,
    eta1: float,
    eta2: float,
    trials: int,
    seed: int,
    km_decode: bool = True,
    jobs: int = 1,
    budget_bits: int = 24,
) -> SimReport:
    """Simulate the full pipeline: syndrome encode, coset-channel encode,
    memoryless channel, list decode, syndrome-sum decode.

    Deterministic for a fixed seed regardless of `jobs`: per-trial generators
    are derived from (seed, trial index). With km_decode=False the final
    source-block reconstruction is skipped and correctness is judged at the
    message-sum level (used to isolate wrong-coset statistics cheaply).
    """
    nsrc, ntc = normalize_instance(src, tc)
    q = nsrc.q
    if kmcode.q != q or kmcode.n != n or kmcode.l != l:
        raise ValidationError("syndrome code parameters do not match (q, n, l)")
    pair = ncc_build(n, k, l, q, np.random.default_rng(np.random.SeedSequence([seed, 0])))
    pzy = composed_joint(nsrc, mac, ntc).marginal(["z", "y"])
    cfg1 = EncoderConfig.from_test_channel(ntc, 1, eta2)
    cfg2 = EncoderConfig.from_test_channel(ntc, 2, eta2)
    joint_cdf = np.cumsum(nsrc.joint.table.ravel())
    w_cdf = np.cumsum(mac.table, axis=2)
    pz = nsrc.sum_pmf()
    size_k = q**k

    def one_trial(t: int) -> tuple[str, bool, bool, bool]:
        """(category, enc1_failed, enc2_failed, epsilon3 and eligibility)."""
        rng = _trial_rng(seed, t)
        s1v, s2v = _sample_pairs(joint_cdf, q, n, rng)
        s1 = FieldVector(q, s1v)
        s2 = FieldVector(q, s2v)
        m1 = km_encode(kmcode, s1)
        m2 = km_encode(kmcode, s2)
        enc1 = ncc_encode(pair, 1, m1, cfg1, rng, budget_bits=budget_bits)
        enc2 = ncc_encode(pair, 2, m2, cfg2, rng, budget_bits=budget_bits)
        f1 = isinstance(enc1, EncoderFailure)
        f2 = isinstance(enc2, EncoderFailure)
        if f1 or f2:
            return "encoder_failure", f1, f2, (False, False)
        y = _sample_channel(w_cdf, enc1.x, enc2.x, rng)
        dec = ncc_decode(pair, y, pzy, eta1, budget_bits=budget_bits)
        true_m = m1 + m2
        true_rank = tuple_index(true_m.values, q)
        if isinstance(dec, DecodeFailure) and dec.reason == "y_atypical":
            return "y_atypical", False, False, (False, False)
        listed = dec.cosets
        eps3 = any(r != true_rank for r in listed)
        if isinstance(dec, DecodeFailure):
            return dec.reason, False, False, (eps3, True)
        if dec.m != true_m:
            return "wrong_unique_coset", False, False, (eps3, True)
        if km_decode:
            zhat = km_sum_decode(kmcode, dec.m, pz, budget_bits=budget_bits)
            if isinstance(zhat, DecodeFailure) or zhat != s1 + s2:
                return "km_decode_error", False, False, (eps3, True)
        return "ok", False, False, (eps3, True)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one_trial, range(trials)))
    else:
        outcomes = [one_trial(t) for t in range(trials)]

    counts = {cat: 0 for cat in CATEGORIES}
    enc_fail = [0, 0]
    eps3_count = eps3_eligible = 0
    for cat, f1, f2, (e3, eligible) in outcomes:
        counts[cat] += 1
        enc_fail[0] += f1
        enc_fail[1] += f2
        eps3_count += e3
        eps3_eligible += eligible
    return SimReport(
        params={
            "q": q, "n": n, "k": k, "l": l,
            "eta1": eta1, "eta2": eta2, "seed": seed, "trials": trials,
        },
        trials=trials,
        counts=counts,
        encoder_failures=(enc_fail[0], enc_fail[1]),
        epsilon3_count=eps3_count,
        epsilon3_eligible=eps3_eligible,
        km_decoded=km_decode,
    )


# ---------------------------------------------------------------------------
# Exact ensemble verification
# ---------------------------------------------------------------------------


def _ensemble_members(q: int, n: int, k: int, l: int, budget_bits: int):
    """Iterate every (g_i, g_oi, b1, b2) tuple of the code ensemble."""
    digits = k * n + l * n + 2 * n
    if digits * math.log2(q) > budget_bits:
        raise BudgetError(
            f"ensemble of q^{digits} codes exceeds the {budget_bits}-bit budget"
        )
    for flat in itertools.product(range(q), repeat=digits):
        arr = np.array(flat, dtype=np.int64)
        g_i = arr[: k * n].reshape(k, n)
        g_oi = arr[k * n : k * n + l * n].reshape(l, n)
        b1 = arr[k * n + l * n : k * n + l * n + n]
        b2 = arr[k * n + l * n + n :]
        yield g_i, g_oi, b1, b2


def _codeword_rank(v: np.ndarray, q: int) -> int:
    return tuple_index(v, q)


@dataclass
class Lemma1Report:
    ensemble_size: int
    clause_a: bool
    clause_b: bool
    clause_c: bool
    negative_control_fails: bool

    @property
    def passed(self) -> bool:
        return self.clause_a and self.clause_b and self.clause_c and self.negative_control_fails


def verify_lemma1_exact(
    q: int, n: int, k: int, l: int,
    budget_bits: int = 26,
    decoder_bias_mode: str = "sum",
) -> Lemma1Report:
    """Exhaustively check codeword-uniformity over the whole code ensemble.

    (a) each decoder-code codeword value is exactly uniform on F_q^n;
    (b) each pair of per-user codewords is exactly uniform on F_q^2n;
    (c) (user-1, user-2, decoder) codeword triples at inner index 0 are
        exactly uniform on F_q^3n for every competing message sum.
    The negative control replays (c) with the competing message equal to the
    true sum, where uniformity must fail.

    decoder_bias_mode="first" deliberately miswires the decoder bias to b1
    (a test fixture that must make the checks fail).
    """
    if decoder_bias_mode not in ("sum", "first"):
        raise ValidationError(f"unknown decoder_bias_mode {decoder_bias_mode!r}")
    n_a = q**k
    n_m = q**l
    n_v = q**n
    a_tuples = all_tuples(q, k)
    m_tuples = all_tuples(q, l)
    hist_a = np.zeros((n_a * n_m, n_v), dtype=np.int64)
    hist_b = np.zeros((n_a * n_m, n_a * n_m, n_v, n_v), dtype=np.int64)
    hist_c = {}
    hist_c_neg = {}
    size = 0
    for g_i, g_oi, b1, b2 in _ensemble_members(q, n, k, l, budget_bits):
        size += 1
        b_dec = (b1 + b2) % q if decoder_bias_mode == "sum" else b1
        for ia in range(n_a):
            agi = a_tuples[ia] @ g_i
            for im in range(n_m):
                v = (agi + m_tuples[im] @ g_oi + b_dec) % q
                hist_a[ia * n_m + im, _codeword_rank(v, q)] += 1
        v1_0 = (m_tuples @ g_oi + b1) % q  # per-user codewords at a = 0
        v2_0 = (m_tuples @ g_oi + b2) % q
        vdec_0 = (m_tuples @ g_oi + b_dec) % q
        for i1 in range(n_a):
            for im1 in range(n_m):
                r1 = _codeword_rank((a_tuples[i1] @ g_i + m_tuples[im1] @ g_oi + b1) % q, q)
                for i2 in range(n_a):
                    for im2 in range(n_m):
                        r2 = _codeword_rank(
                            (a_tuples[i2] @ g_i + m_tuples[im2] @ g_oi + b2) % q, q
                        )
                        hist_b[i1 * n_m + im1, i2 * n_m + im2, r1, r2] += 1
        for im1 in range(n_m):
            r1 = _codeword_rank(v1_0[im1], q)
            for im2 in range(n_m):
                r2 = _codeword_rank(v2_0[im2], q)
                msum = (m_tuples[im1] + m_tuples[im2]) % q
                sum_rank = tuple_index(msum, q)
                for imh in range(n_m):
                    rv = _codeword_rank(vdec_0[imh], q)
                    key = (im1, im2, imh)
                    target = hist_c if imh != sum_rank else hist_c_neg
                    if key not in target:
                        target[key] = np.zeros((n_v, n_v, n_v), dtype=np.int64)
                    target[key][r1, r2, rv] += 1

    clause_a = bool(np.all(hist_a == size // n_v))
    clause_b = bool(np.all(hist_b == size // (n_v * n_v)))
    expected_c = size // (n_v**3)
    clause_c = all(bool(np.all(h == expected_c)) for h in hist_c.values()) and bool(hist_c)
    negative_fails = all(not bool(np.all(h == expected_c)) for h in hist_c_neg.values())
    return Lemma1Report(size, clause_a, clause_b, clause_c, negative_fails)


@dataclass
class Lemma2Report:
    ensemble_size: int
    factorizes: bool
    distinct_coset_pairs: int
    distinct_codewords: int


def verify_lemma2_exact(
    q: int, n: int, k: int, l: int,
    m1_rank: int = 0,
    m2_rank: int = 0,
    m_hat_rank: int | None = None,
    a_hat_rank: int = 0,
    budget_bits: int = 26,
    decoder_bias_mode: str = "sum",
) -> Lemma2Report:
    """Exact independence of the two indexed cosets from a competing-coset
    codeword, by integer counting over the whole ensemble.

    With the default m_hat (any message different from the indexed sum) the
    joint counts must factorize exactly; passing m_hat_rank equal to the sum
    is the negative control, where factorization must fail.
    """
    if decoder_bias_mode not in ("sum", "first"):
        raise ValidationError(f"unknown decoder_bias_mode {decoder_bias_mode!r}")
    n_m = q**l
    m_tuples = all_tuples(q, l)
    sum_rank = tuple_index((m_tuples[m1_rank] + m_tuples[m2_rank]) % q, q)
    if m_hat_rank is None:
        m_hat_rank = next(r for r in range(n_m) if r != sum_rank)
    a_tuples = all_tuples(q, k)
    triple: dict = {}
    pair_counts: dict = {}
    v_counts: dict = {}
    size = 0
    for g_i, g_oi, b1, b2 in _ensemble_members(q, n, k, l, budget_bits):
        size += 1
        b_dec = (b1 + b2) % q if decoder_bias_mode == "sum" else b1
        c1 = ((a_tuples @ g_i) + m_tuples[m1_rank] @ g_oi + b1) % q
        c2 = ((a_tuples @ g_i) + m_tuples[m2_rank] @ g_oi + b2) % q
        v = (a_tuples[a_hat_rank] @ g_i + m_tuples[m_hat_rank] @ g_oi + b_dec) % q
        key1 = c1.tobytes()
        key2 = c2.tobytes()
        keyv = v.tobytes()
        triple[(key1, key2, keyv)] = triple.get((key1, key2, keyv), 0) + 1
        pair_counts[(key1, key2)] = pair_counts.get((key1, key2), 0) + 1
        v_counts[keyv] = v_counts.get(keyv, 0) + 1
    factorizes = True
    for (k1, k2), cp in pair_counts.items():
        for kv, cv in v_counts.items():
            if size * triple.get((k1, k2, kv), 0) != cp * cv:
                factorizes = False
                break
        if not factorizes:
            break
    return Lemma2Report(size, factorizes, len(pair_counts), len(v_counts))


# ---------------------------------------------------------------------------
# Monte Carlo independence of the output from a competing codeword
# ---------------------------------------------------------------------------


@dataclass
class Remark2Report:
    draws: int
    chi2: float
    dof: int
    p_value: float
    independent: bool  # at significance 0.01


def _type_bucket(seq: np.ndarray, size: int, buckets: int) -> int:
    counts = np.bincount(seq, minlength=size).astype(np.int64)
    return zlib.crc32(counts.tobytes()) % buckets


def verify_remark2_mc(
    src: SourcePair,
    mac: Mac,
    tc: TestChannel,
    n: int,
    k: int,
    l: int,
    trials: int,
    seed: int,
    m_hat_mode: str = "wrong",
    buckets: int = 8,
    eta2: float | None = None,
) -> Remark2Report:
    """Chi-square independence test between the channel output block and a
    competing-coset codeword, over fresh code-ensemble draws.

    Messages are held fixed (conditioning on the source blocks); each draw
    samples a new code, encodes, and transmits. m_hat_mode="true" targets the
    codeword indexed by the actual message sum, where dependence must show.

    Encoders that find no typical codeword fall back to a uniform codeword of
    the indexed coset, keeping the transmitted block a function of the coset
    and private randomness only.
    """
    nsrc, ntc = normalize_instance(src, tc)
    q = nsrc.q
    if eta2 is None:
        eta2 = float(q)  # vacuous: every codeword is typical
    cfg1 = EncoderConfig.from_test_channel(ntc, 1, eta2)
    cfg2 = EncoderConfig.from_test_channel(ntc, 2, eta2)
    w_cdf = np.cumsum(mac.table, axis=2)
    root = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    m_tuples = all_tuples(q, l)
    m1 = FieldVector(q, root.integers(0, q, size=l, dtype=np.int64))
    m2 = FieldVector(q, root.integers(0, q, size=l, dtype=np.int64))
    sum_rank = tuple_index((m1 + m2).values, q)
    if m_hat_mode == "wrong":
        m_hat_rank = next(r for r in range(q**l) if r != sum_rank)
    elif m_hat_mode == "true":
        m_hat_rank = sum_rank
    else:
        raise ValidationError(f"unknown m_hat_mode {m_hat_mode!r}")
    m_hat = FieldVector(q, m_tuples[m_hat_rank])
    a_hat = FieldVector(q, np.zeros(k, dtype=np.int64))
    table = np.zeros((buckets, buckets), dtype=np.int64)
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 3, t]))
        pair = ncc_build(n, k, l, q, rng)
        xs = []
        for user, m, cfg in ((1, m1, cfg1), (2, m2, cfg2)):
            enc = ncc_encode(pair, user, m, cfg, rng)
            if isinstance(enc, EncoderFailure):
                code = pair.encoder_code(user)
                coset = code.coset_matrix(m)
                v = coset[rng.integers(len(coset))]
                from .ncc import _sample_rows

                xs.append(_sample_rows(cfg.p_x_given_v, v, rng))
            else:
                xs.append(enc.x)
        y = _sample_channel(w_cdf, xs[0], xs[1], rng)
        v_hat = pair.decoder_code().codeword(a_hat, m_hat)
        table[_type_bucket(y, mac.y_size, buckets), _type_bucket(v_hat.values, q, buckets)] += 1
    live = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if live.shape[0] < 2 or live.shape[1] < 2:
        # degenerate marginals (e.g. constant output): trivially independent
        return Remark2Report(trials, 0.0, 0, 1.0, True)
    from scipy.stats import chi2_contingency  # deferred: scipy import is slow

    res = chi2_contingency(live)
    return Remark2Report(trials, float(res.statistic), int(res.dof), float(res.pvalue),
                         bool(res.pvalue > 0.01))


# ---------------------------------------------------------------------------
# Ensemble bound check
# ---------------------------------------------------------------------------


@dataclass
class BoundCheck:
    empirical: float
    bound: float
    sigma: float
    eligible: int
    ok: bool


def check_error_bound(report: SimReport, bound: float) -> BoundCheck:
    """Empirical wrong-coset-listing rate against the ensemble bound plus
    three binomial standard deviations; vacuous when the bound is 1."""
    n = report.epsilon3_eligible
    p_hat = report.epsilon3_rate
    if bound >= 1.0:
        return BoundCheck(p_hat, bound, 0.0, n, True)
    sigma = math.sqrt(bound * (1.0 - bound) / n) if n else 0.0
    return BoundCheck(p_hat, bound, sigma, n, p_hat <= bound + 3.0 * sigma + 1e-12)
