import itertools
import math

import numpy as np
import pytest

from cosetsum.errors import BudgetError, NotSupportedError
from cosetsum.model import (
    LayeredChannelTest,
    LayeredSourceTest,
    Mac,
    SourcePair,
    TestChannel,
    adder_mac,
    builtin_example,
    integer_adder_mac,
    uniform_test_channel,
)
from cosetsum.probability import ConditionalPmf, JointPmf
from cosetsum.regions import (
    RateRegion3,
    alpha_details,
    alpha_rate,
    alpha_sup,
    beta_c,
    beta_s,
    computation_lambda,
    lcc_rate,
    rate_summary,
    regions_intersect,
    separation_lambda,
    separation_lambda_cap,
    simplex_grid,
    sum_capacity_product,
)

LOG2_3 = math.log2(3)
LOG2_5 = math.log2(5)


def uniform_source(q):
    return SourcePair(q, JointPmf((("s1", q), ("s2", q)), np.full((q, q), 1 / q**2)))


def direct_alpha_oracle(src, mac, tc):
    """Independent alpha computation by plain dictionary summation."""
    q = src.q
    c1, c2 = src.coeffs
    jz = {}
    pv1 = np.zeros(q)
    pv2 = np.zeros(q)
    for v1 in range(q):
        for x1 in range(mac.x1_size):
            for v2 in range(q):
                for x2 in range(mac.x2_size):
                    mass = tc.p1.table[v1, x1] * tc.p2.table[v2, x2]
                    if mass == 0:
                        continue
                    pv1[v1] += mass
                    pv2[v2] += mass
                    z = (c1 * v1 + c2 * v2) % q
                    for y in range(mac.y_size):
                        jz[(z, y)] = jz.get((z, y), 0.0) + mass * mac.table[x1, x2, y]
    def ent(vals):
        return -sum(p * math.log2(p) for p in vals if p > 0)
    hzy = ent(jz.values()) - ent(
        [sum(p for (z, y), p in jz.items() if y == yy) for yy in range(mac.y_size)]
    )
    return max(0.0, min(ent(pv1), ent(pv2)) - hzy)


# ---------------------------------------------------------------------------
# alpha for a fixed test channel
# ---------------------------------------------------------------------------


def test_alpha_example1_published():
    src, mac, tc = builtin_example(1)
    assert alpha_rate(src, mac, tc) == pytest.approx(1.0, abs=1e-12)


def test_alpha_example3_published():
    src, mac, tc = builtin_example(3)
    assert alpha_rate(src, mac, tc) == pytest.approx(0.4790, abs=5e-4)


def test_alpha_examples_2_and_4_match_independent_oracle():
    # the published constants for these two differ from the exact tables;
    # the oracle of record is direct summation
    for ex, frozen in ((2, 0.45420), (4, 0.45878)):
        src, mac, tc = builtin_example(ex)
        a = alpha_rate(src, mac, tc)
        assert a == pytest.approx(direct_alpha_oracle(src, mac, tc), abs=1e-9)
        assert a == pytest.approx(frozen, abs=5e-5)


def test_alpha_zero_for_deterministic_v():
    src, mac, _ = builtin_example(4)
    t = np.zeros((2, 2))
    t[0, 0] = 1.0
    tc = TestChannel(
        JointPmf((("v1", 2), ("x1", 2)), t),
        JointPmf((("v2", 2), ("x2", 2)), np.full((2, 2), 0.25)),
    )
    assert alpha_rate(src, mac, tc) == 0.0


def test_alpha_invariant_under_coefficient_relabeling():
    src, mac, tc = builtin_example(3)
    plain = SourcePair(3, src.joint, (1, 1))
    # relabeled channel: v2 -> 2*v2 while the source target becomes plain
    relabeled = tc.relabeled(1, 2)
    assert alpha_rate(src, mac, tc) == pytest.approx(
        alpha_rate(plain, mac, relabeled), abs=1e-12
    )


def test_alpha_bounded_by_min_entropy_random_channels():
    rng = np.random.default_rng(21)
    src = uniform_source(2)
    for _ in range(20):
        w = rng.random((2, 2, 3))
        w /= w.sum(axis=2, keepdims=True)
        mac = Mac(2, 2, 3, ConditionalPmf((("x1", 2), ("x2", 2)), (("y", 3),), w))
        t1 = rng.random((2, 2)); t1 /= t1.sum()
        t2 = rng.random((2, 2)); t2 /= t2.sum()
        tc = TestChannel(JointPmf((("v1", 2), ("x1", 2)), t1),
                         JointPmf((("v2", 2), ("x2", 2)), t2))
        det = alpha_details(src, mac, tc)
        assert det["alpha_bits"] <= det["h_min_bits"] + 1e-12 <= 1.0 + 1e-12


def test_computation_lambda():
    src1 = builtin_example(1)[0]
    assert computation_lambda(src1, 1.0) == pytest.approx(0.43067, abs=5e-5)
    src3 = builtin_example(3)[0]
    assert computation_lambda(src3, 0.4790) == pytest.approx(0.3022, abs=5e-5)
    assert computation_lambda(src1, 0.0) == 0.0
    # constant sum: any rate achievable
    t = np.zeros((2, 2))
    t[0, 0] = t[1, 1] = 0.5
    const = SourcePair(2, JointPmf((("s1", 2), ("s2", 2)), t))
    assert math.isinf(computation_lambda(const, 0.1))


# ---------------------------------------------------------------------------
# linear-code baseline
# ---------------------------------------------------------------------------


def test_lcc_example1():
    src, mac, _ = builtin_example(1)
    r = lcc_rate(mac, 5)
    assert r == pytest.approx(0.6 * LOG2_3, abs=1e-12)
    assert computation_lambda(src, r) == pytest.approx(0.4096, abs=5e-5)


def test_lcc_example2():
    _, mac, _ = builtin_example(2)
    assert lcc_rate(mac, 5) == pytest.approx(0.6096, abs=5e-5)


def test_lcc_inapplicable_for_non_additive_channels():
    _, mac4, _ = builtin_example(4)
    assert lcc_rate(mac4, 2) is None
    _, mac3, _ = builtin_example(3)
    assert lcc_rate(mac3, 3) is None


def test_lcc_never_exceeds_search_with_uniform_identity_included():
    for ex in (1, 2):
        src, mac, _ = builtin_example(ex)
        lcc = lcc_rate(mac, 5)
        sup, _ = alpha_sup(src, mac, grid=8)
        assert sup >= lcc - 1e-9


# ---------------------------------------------------------------------------
# separation baselines
# ---------------------------------------------------------------------------


def test_separation_example1_exact():
    src, mac, _ = builtin_example(1)
    assert separation_lambda(src, mac, grid=8) == pytest.approx(
        LOG2_3 / (2 * LOG2_5), abs=1e-12
    )
    assert separation_lambda_cap(src, mac) == pytest.approx(0.3413, abs=5e-5)


def test_separation_example2_computed_vs_cap_accounting():
    # the noisy channel caps the true product-input sum rate strictly below
    # log2 |Y|; the published 0.3413 is the cardinality accounting
    src, mac, _ = builtin_example(2)
    computed = separation_lambda(src, mac, grid=8)
    h_row = -(0.9 * math.log2(0.9) + 0.1 * math.log2(0.05))
    assert computed == pytest.approx((LOG2_3 - h_row) / (2 * LOG2_5), abs=1e-9)
    assert separation_lambda_cap(src, mac) == pytest.approx(0.3413, abs=5e-5)
    assert computed < separation_lambda_cap(src, mac)


def test_separation_noiseless_adder_matches_grid_oracle():
    # brute-force oracle over a coarse product grid: C_sum = 1.5 bits at the
    # uniform pair, so lambda = 0.75 for uniform binary sources
    mac = integer_adder_mac(2)
    best = 0.0
    for a in np.linspace(0, 1, 101):
        for b in np.linspace(0, 1, 101):
            py = np.array([(1 - a) * (1 - b), a * (1 - b) + (1 - a) * b, a * b])
            py = py[py > 0]
            best = max(best, float(-(py * np.log2(py)).sum()))
    assert best == pytest.approx(1.5, abs=1e-9)
    c_sum, _ = sum_capacity_product(mac, grid=8)
    assert c_sum == pytest.approx(1.5, abs=1e-12)
    assert separation_lambda(uniform_source(2), mac, grid=8) == pytest.approx(0.75, abs=1e-12)


def test_separation_rejects_correlated_sources():
    t = np.array([[0.45, 0.05], [0.05, 0.45]])
    src = SourcePair(2, JointPmf((("s1", 2), ("s2", 2)), t))
    with pytest.raises(NotSupportedError):
        separation_lambda(src, adder_mac(2, 0.0))


# ---------------------------------------------------------------------------
# search for the best test channel
# ---------------------------------------------------------------------------


def test_alpha_sup_example1_reaches_one_bit():
    src, mac, _ = builtin_example(1)
    best, tc = alpha_sup(src, mac, deterministic_maps_only=True, grid=16)
    assert best >= 1.0 - 1e-9
    assert alpha_rate(src, mac, tc) == pytest.approx(best, abs=1e-9)


def test_alpha_sup_identity_channel():
    src = uniform_source(2)
    t = np.zeros((2, 2, 4))
    for x1 in range(2):
        for x2 in range(2):
            t[x1, x2, 2 * x1 + x2] = 1.0
    mac = Mac(2, 2, 4, ConditionalPmf((("x1", 2), ("x2", 2)), (("y", 4),), t))
    best, _ = alpha_sup(src, mac, grid=8)
    assert best == pytest.approx(1.0, abs=1e-9)


def test_alpha_sup_useless_channel_zero_by_both_searches():
    src = uniform_source(2)
    t = np.full((2, 2, 2), 0.5)
    mac = Mac(2, 2, 2, ConditionalPmf((("x1", 2), ("x2", 2)), (("y", 2),), t))
    b1, _ = alpha_sup(src, mac, grid=8)
    b2, _ = alpha_sup(src, mac, deterministic_maps_only=False, joint_grid=6)
    assert b1 == pytest.approx(0.0, abs=1e-9)
    assert b2 == pytest.approx(0.0, abs=1e-9)


def test_alpha_sup_budget_error():
    src, mac, _ = builtin_example(1)
    with pytest.raises(BudgetError):
        alpha_sup(src, mac, pairing="full", budget=1000)
    with pytest.raises(BudgetError):
        alpha_sup(src, mac, deterministic_maps_only=False, joint_grid=16)


def test_simplex_grid_contents():
    g = simplex_grid(4, 2)
    assert len(g) == 5
    assert np.allclose(g.sum(axis=1), 1.0)
    assert any(np.allclose(row, [0.5, 0.5]) for row in g)


# ---------------------------------------------------------------------------
# two-layer regions
# ---------------------------------------------------------------------------


def region_constants(region, coeffs, sense):
    return [c for cf, s, c in region.inequalities if cf == coeffs and s == sense]


def test_beta_s_degenerate_reduces_to_sum_entropy():
    src, _, _ = builtin_example(1)
    reg = beta_s(LayeredSourceTest.degenerate(src))
    assert region_constants(reg, (0, 0, 1), ">=")[0] == pytest.approx(LOG2_5, abs=1e-9)
    assert region_constants(reg, (1, 0, 0), ">=")[0] == pytest.approx(0.0, abs=1e-9)
    assert region_constants(reg, (1, 1, 0), ">=")[0] == pytest.approx(0.0, abs=1e-9)


def test_beta_s_identity_is_full_reconstruction_corner():
    # doubly symmetric binary source with flip probability 0.1
    t = np.array([[0.45, 0.05], [0.05, 0.45]])
    src = SourcePair(2, JointPmf((("s1", 2), ("s2", 2)), t))
    reg = beta_s(LayeredSourceTest.identity(src))
    h_cond = src.joint.conditional_entropy("s1", "s2")
    assert region_constants(reg, (1, 0, 0), ">=")[0] == pytest.approx(h_cond, abs=1e-9)
    assert region_constants(reg, (0, 1, 0), ">=")[0] == pytest.approx(h_cond, abs=1e-9)
    assert region_constants(reg, (1, 1, 0), ">=")[0] == pytest.approx(
        src.joint.entropy(["s1", "s2"]), abs=1e-9
    )
    assert region_constants(reg, (0, 0, 1), ">=")[0] == pytest.approx(0.0, abs=1e-9)


def test_beta_s_one_sided_quantizer():
    # T1 = S1, T2 degenerate on the doubly symmetric source
    t = np.array([[0.45, 0.05], [0.05, 0.45]])
    src = SourcePair(2, JointPmf((("s1", 2), ("s2", 2)), t))
    lt = LayeredSourceTest.from_conditionals(src, np.eye(2), np.ones((1, 2)))
    reg = beta_s(lt)
    hb = -(0.1 * math.log2(0.1) + 0.9 * math.log2(0.9))
    assert region_constants(reg, (1, 0, 0), ">=")[0] == pytest.approx(1.0, abs=1e-9)
    assert region_constants(reg, (0, 0, 1), ">=")[0] == pytest.approx(hb, abs=1e-9)


def test_beta_c_degenerate_u_reduces_to_alpha():
    src, mac, tc = builtin_example(1)
    reg = beta_c(LayeredChannelTest.from_test_channel(tc), mac)
    assert region_constants(reg, (0, 0, 1), "<=")[0] == pytest.approx(1.0, abs=1e-9)
    assert region_constants(reg, (1, 0, 0), "<=")[0] == pytest.approx(0.0, abs=1e-9)
    assert region_constants(reg, (1, 1, 0), "<=")[0] == pytest.approx(0.0, abs=1e-9)


def test_beta_c_degenerate_v_is_plain_multiple_access():
    src, mac, _ = builtin_example(1)
    p_even = np.array([0.5, 0.0, 0.5, 0.0, 0.0])
    ct = LayeredChannelTest.from_inputs(5, p_even, p_even)
    reg = beta_c(ct, mac)
    # R2 is shut off and the pairwise bounds match the plain access rates
    assert region_constants(reg, (0, 0, 1), "<=")[0] == pytest.approx(0.0, abs=1e-9)
    joint = ct.joint().compose(mac.w)
    i1 = joint.mutual_information("u1", ["y", "u2"])
    isum = joint.mutual_information(["u1", "u2"], "y")
    assert region_constants(reg, (1, 0, 0), "<=")[0] == pytest.approx(i1, abs=1e-9)
    assert region_constants(reg, (1, 1, 0), "<=")[0] == pytest.approx(isum, abs=1e-9)
    assert i1 == pytest.approx(1.0, abs=1e-9)
    assert isum == pytest.approx(1.5, abs=1e-9)


# ---------------------------------------------------------------------------
# intersection by vertex enumeration
# ---------------------------------------------------------------------------


def test_intersect_simple_band():
    a = RateRegion3((((0, 0, 1), ">=", 1.0),), tag="a")
    b = RateRegion3((((0, 0, 1), "<=", 2.0),), tag="b")
    feasible, witness = regions_intersect(a, b)
    assert feasible
    assert witness[2] >= 1.0 - 1e-9 and witness[2] <= 2.0 + 1e-9
    assert a.contains(witness) and b.contains(witness)


def test_intersect_disjoint_band():
    a = RateRegion3((((0, 0, 1), ">=", 1.0),), tag="a")
    b = RateRegion3((((0, 0, 1), "<=", 0.5),), tag="b")
    feasible, witness = regions_intersect(a, b)
    assert not feasible and witness is None


def test_intersect_exact_boundary():
    a = RateRegion3((((0, 0, 1), ">=", 1.0),))
    b = RateRegion3((((0, 0, 1), "<=", 1.0),))
    assert regions_intersect(a, b)[0]


def test_intersect_brute_force_cross_check():
    # randomized cross-check against a dense grid probe
    rng = np.random.default_rng(4)
    coeff_choices = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)]
    for trial in range(40):
        lows = [(coeff_choices[rng.integers(7)], ">=", float(rng.uniform(0, 1.2)))
                for _ in range(2)]
        highs = [(coeff_choices[rng.integers(7)], "<=", float(rng.uniform(0, 2.0)))
                 for _ in range(3)]
        a = RateRegion3(tuple(lows))
        b = RateRegion3(tuple(highs))
        feasible, witness = regions_intersect(a, b)
        grid = np.linspace(0, 2.5, 26)
        probe = any(
            a.contains((r1, r2, r3), tol=1e-12) and b.contains((r1, r2, r3), tol=1e-12)
            for r1 in grid for r2 in grid for r3 in grid
        )
        if probe:
            assert feasible, f"vertex method missed a feasible grid point (trial {trial})"
        if feasible:
            assert a.contains(witness) and b.contains(witness)


def test_thm1_reduction_feasibility_threshold():
    # degenerate first layers: feasible exactly when lam * H(Z) <= alpha
    for ex in (1, 3):
        src, mac, tc = builtin_example(ex)
        alpha = alpha_rate(src, mac, tc)
        hz = src.sum_entropy()
        source_reg = beta_s(LayeredSourceTest.degenerate(src.normalized()))
        chan_reg = beta_c(LayeredChannelTest.from_test_channel(
            tc.relabeled(*src.coeffs)), mac)
        for lam in (0.5 * alpha / hz, (alpha - 1e-6) / hz, alpha / hz,
                    (alpha + 1e-6) / hz, 2 * alpha / hz):
            feasible, _ = regions_intersect(source_reg.scaled(lam), chan_reg)
            assert feasible == (lam * hz <= alpha + 1e-9)


def test_separation_reduction_matches_corner_condition():
    # identity source layer vs degenerate-V channel layer: feasibility is
    # decided by the minimal corner point against the channel bounds
    src, mac, _ = builtin_example(1)
    h1 = h2 = LOG2_5
    p_even = np.array([0.5, 0.0, 0.5, 0.0, 0.0])
    ct = LayeredChannelTest.from_inputs(5, p_even, p_even)
    creg = beta_c(ct, mac)
    sreg = beta_s(LayeredSourceTest.identity(src))
    for lam in (0.1, 0.2, 0.3, 0.32, 0.33, 0.4, 0.6):
        corner = (lam * h1, lam * h2, 0.0)
        assert regions_intersect(sreg.scaled(lam), creg)[0] == creg.contains(corner)


def test_rate_summary_bundle():
    src, mac, tc = builtin_example(1)
    s = rate_summary(src, mac, tc, grid=8)
    assert s.alpha_bits == pytest.approx(1.0, abs=1e-9)
    assert s.lcc_lambda == pytest.approx(0.4096, abs=5e-5)
    assert s.separation_lambda == pytest.approx(0.3413, abs=5e-5)
    assert s.ncc_lambda == pytest.approx(0.43067, abs=5e-5)
    assert s.alpha_sup_bits >= 1.0 - 1e-9
    assert s.details["h_z_bits"] == pytest.approx(LOG2_5, abs=1e-12)
