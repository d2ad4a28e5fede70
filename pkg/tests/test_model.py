import math

import numpy as np
import pytest

from cosetsum.errors import ArgumentError, ParseError, ValidationError
from cosetsum.model import (
    LayeredChannelTest,
    LayeredSourceTest,
    SourcePair,
    adder_mac,
    builtin_example,
    load_instance,
    normalize_instance,
    preset_instance,
    save_instance,
    uniform_test_channel,
)
from cosetsum.probability import JointPmf


def test_builtin_ids_validated():
    for bad in (0, 5, "1", None):
        with pytest.raises(ArgumentError):
            builtin_example(bad)


def test_example1_channel_rows():
    _, mac, _ = builtin_example(1)
    # even input sums pass through noiselessly; y indices map symbols 0,2,4
    assert np.allclose(mac.table[0, 0], [1, 0, 0])  # w = 0
    assert np.allclose(mac.table[1, 1], [0, 1, 0])  # w = 2
    assert np.allclose(mac.table[2, 2], [0, 0, 1])  # w = 4
    assert np.allclose(mac.table[0, 1], [1 / 3, 1 / 3, 1 / 3])  # w = 1
    assert mac.y_size == 3


def test_example2_channel_rows():
    _, mac, _ = builtin_example(2)
    assert np.allclose(mac.table[0, 0], [0.9, 0.05, 0.05])
    assert np.allclose(mac.table[0, 1], [1 / 3, 1 / 3, 1 / 3])


def test_example3_source_and_channel():
    src, mac, tc = builtin_example(3)
    assert src.coeffs == (1, 2)
    assert mac.y_size == 2
    assert np.allclose(mac.table[0, 0], [0.9, 0.1])
    assert np.allclose(mac.table[0, 1], [0.1, 0.9])
    assert np.allclose(tc.p1.table, np.eye(3) / 3)


def test_example4_rows():
    _, mac, _ = builtin_example(4)
    assert np.allclose(mac.table[0, 0], [0.8, 0.2])
    assert np.allclose(mac.table[1, 1], [0.9, 0.1])
    assert np.allclose(mac.table[0, 1], [0.1, 0.9])


def test_builtin_rows_sum_to_one_tightly():
    for ex in (1, 2, 3, 4):
        _, mac, _ = builtin_example(ex)
        sums = mac.table.sum(axis=2)
        assert np.all(np.abs(sums - 1.0) <= 1e-15)


def test_test_channels_product_form_and_v_alphabet():
    for ex in (1, 2, 3, 4):
        src, _, tc = builtin_example(ex)
        assert tc.q == src.q
        joint = tc.joint()
        recon = np.multiply.outer(tc.p1.table, tc.p2.table)
        assert np.allclose(joint.table, recon, atol=1e-15)


# ---------------------------------------------------------------------------
# coefficient normalization
# ---------------------------------------------------------------------------


def test_normalization_preserves_entropies():
    src, _, tc = builtin_example(3)
    nsrc, ntc = normalize_instance(src, tc)
    assert nsrc.coeffs == (1, 1)
    assert nsrc.joint.entropy("s1") == pytest.approx(src.joint.entropy("s1"), abs=1e-12)
    assert nsrc.sum_entropy() == pytest.approx(math.log2(3), abs=1e-12)
    assert ntc.p2.entropy("v2") == pytest.approx(tc.p2.entropy("v2"), abs=1e-12)


def test_weighted_sum_pmf():
    # target S1 + 2*S2 over F_3 with uniform independent sources is uniform
    src, _, _ = builtin_example(3)
    assert np.allclose(src.sum_pmf(), np.full(3, 1 / 3), atol=1e-12)


def test_zero_coefficient_rejected():
    with pytest.raises(ValidationError):
        SourcePair(3, JointPmf((("s1", 3), ("s2", 3)), np.full((3, 3), 1 / 9)), (1, 3))


# ---------------------------------------------------------------------------
# layered tests
# ---------------------------------------------------------------------------


def test_layered_source_invariants():
    src, _, _ = builtin_example(4)
    lt = LayeredSourceTest.identity(src)
    assert np.allclose(lt.p.marginal_array(["s1", "s2"]), src.joint.table, atol=1e-12)
    with pytest.raises(ValidationError):
        # T1 depending on both sources breaks the chain condition
        t = np.zeros((2, 1, 2, 2))
        for s1 in range(2):
            for s2 in range(2):
                t[(s1 + s2) % 2, 0, s1, s2] = 0.25
        LayeredSourceTest(JointPmf((("t1", 2), ("t2", 1), ("s1", 2), ("s2", 2)), t))


def test_layered_channel_builders():
    src, mac, tc = builtin_example(1)
    lc = LayeredChannelTest.from_test_channel(tc)
    assert lc.q == 5
    assert lc.p1.size("u1") == 1
    lc2 = LayeredChannelTest.from_inputs(2, [0.5, 0.5], [1.0, 0.0])
    assert lc2.p1.marginal_array("v1").tolist() == [1.0, 0.0]


# ---------------------------------------------------------------------------
# instance text format
# ---------------------------------------------------------------------------


def test_roundtrip_builtins():
    for ex in (1, 2, 3, 4):
        src, mac, tc = builtin_example(ex)
        text = save_instance(src, mac, tc)
        src2, mac2, tc2 = load_instance(text)
        assert src2.q == src.q and src2.coeffs == src.coeffs
        assert np.array_equal(src2.joint.table, src.joint.table)
        assert np.array_equal(mac2.table, mac.table)
        assert np.array_equal(tc2.p1.table, tc.p1.table)
        assert np.array_equal(tc2.p2.table, tc.p2.table)


def test_roundtrip_without_test_channel():
    src, mac, _ = builtin_example(4)
    _, mac2, tc2 = load_instance(save_instance(src, mac, None))
    assert tc2 is None
    assert np.array_equal(mac2.table, mac.table)


def test_fractions_parsed_exactly():
    text = """
[source]
q = 2
coeffs = 1 1
row = 1/4 1/4
row = 1/4 1/4
[mac]
x1_size = 2
x2_size = 2
y_size = 2
row = 1 0
row = 0 1
row = 0 1
row = 1 0
"""
    src, mac, tc = load_instance(text)
    assert src.joint.table[0, 0] == 0.25
    assert tc is None


def test_bad_row_sum_reports_validation_error():
    text = save_instance(*builtin_example(4)).replace(
        "row = 0.80000000000000004 0.20000000000000001", "row = 0.8 0.1", 1
    )
    with pytest.raises(ValidationError):
        load_instance(text)


def test_unknown_key_reports_position():
    text = "[source]\nq = 2\nbogus = 3\n"
    with pytest.raises(ParseError) as err:
        load_instance(text)
    assert err.value.line == 3
    assert "bogus" in str(err.value)


def test_bad_number_reports_position():
    text = "[source]\nq = 2\ncoeffs = 1 x\n"
    with pytest.raises(ParseError) as err:
        load_instance(text)
    assert err.value.line == 3 and err.value.column == 12


def test_presets():
    src, mac, tc = preset_instance("adder")
    assert mac.y_size == 2
    assert np.allclose(adder_mac(2, 0.1).table[0, 0], [0.9, 0.1])
    assert np.allclose(uniform_test_channel(3).p1.table, np.eye(3) / 3)
    with pytest.raises(ArgumentError):
        preset_instance("nope")
