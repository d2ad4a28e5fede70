import itertools

import numpy as np
import pytest

from cosetsum.errors import DecodeFailure, DimensionError
from cosetsum.galois import FieldMatrix, FieldVector, all_tuples, mat_vec_mul, rank
from cosetsum.km import KmCode, km_build, km_encode, km_sum_decode


def vec(q, vals):
    return FieldVector(q, np.array(vals, dtype=np.int64))


def mat(q, rows):
    return FieldMatrix(q, np.array(rows, dtype=np.int64))


def test_build_deterministic_and_uniform():
    a = km_build(3, 6, 2, np.random.default_rng(9))
    b = km_build(3, 6, 2, np.random.default_rng(9))
    assert a.h == b.h
    # entry frequencies over many draws stay in a 3-sigma band
    rng = np.random.default_rng(0)
    draws = km_build(2, 1000, 20, rng)
    freq = (draws.h.values == 1).mean()
    sigma = np.sqrt(0.25 / draws.h.values.size)
    assert abs(freq - 0.5) <= 3 * sigma


def test_build_rejects_l_above_n():
    with pytest.raises(DimensionError):
        KmCode(2, 3, 4, mat(2, np.zeros((4, 3), dtype=int)))


def test_encode_zero_and_linearity():
    code = km_build(5, 8, 3, np.random.default_rng(2))
    assert km_encode(code, vec(5, [0] * 8)) == vec(5, [0, 0, 0])
    rng = np.random.default_rng(3)
    for _ in range(10):
        s1 = vec(5, rng.integers(0, 5, 8))
        s2 = vec(5, rng.integers(0, 5, 8))
        assert km_encode(code, s1) + km_encode(code, s2) == km_encode(code, s1 + s2)


def test_encode_hand_example():
    code = KmCode(2, 3, 2, mat(2, [[1, 1, 0], [0, 1, 1]]))
    assert km_encode(code, vec(2, [1, 0, 1])) == vec(2, [1, 1])


def test_decode_invertible_is_exact_inverse():
    rng = np.random.default_rng(0)
    while True:
        code = km_build(2, 6, 6, rng)
        if rank(code.h) == 6:
            break
    for _ in range(20):
        z = vec(2, rng.integers(0, 2, 6))
        m = km_encode(code, z)
        # any symbol law gives the same answer when the system is invertible
        assert km_sum_decode(code, m, np.array([0.99, 0.01])) == z
        assert km_sum_decode(code, m, np.array([0.01, 0.99])) == z


def test_decode_point_mass_zero():
    code = km_build(3, 5, 2, np.random.default_rng(8))
    out = km_sum_decode(code, vec(3, [0, 0]), np.array([1.0, 0.0, 0.0]))
    assert out == vec(3, [0] * 5)


def test_decode_matches_brute_force_over_solution_coset():
    h = mat(2, [[1, 1, 0], [0, 1, 1]])
    code = KmCode(2, 3, 2, h)
    pz = np.array([0.9, 0.1])
    m = vec(2, [1, 0])
    solutions = [
        z for z in itertools.product(range(2), repeat=3)
        if np.array_equal((h.values @ np.array(z)) % 2, m.values)
    ]
    assert sorted(solutions) == [(0, 1, 1), (1, 0, 0)]
    scores = {z: pz[list(z)].prod() for z in solutions}
    best = max(sorted(scores), key=lambda z: scores[z])
    assert best == (1, 0, 0)
    assert km_sum_decode(code, m, pz) == vec(2, [1, 0, 0])


def test_decode_output_always_satisfies_syndrome():
    rng = np.random.default_rng(5)
    for q in (2, 3):
        code = km_build(q, 7, 3, rng)
        for _ in range(10):
            s = vec(q, rng.integers(0, q, 7))
            m = km_encode(code, s)
            pz = rng.random(q)
            pz /= pz.sum()
            z = km_sum_decode(code, m, pz)
            assert mat_vec_mul(code.h, z) == m


def test_decode_rejects_syndrome_outside_image():
    code = KmCode(2, 2, 2, mat(2, [[1, 1], [1, 1]]))
    out = km_sum_decode(code, vec(2, [0, 1]), np.array([0.5, 0.5]))
    assert isinstance(out, DecodeFailure)
    assert out.reason == "syndrome_outside_image"


def test_decode_ties_break_lexicographically():
    # uniform symbol law makes every solution equally likely
    h = mat(2, [[1, 1, 0], [0, 1, 1]])
    code = KmCode(2, 3, 2, h)
    out = km_sum_decode(code, vec(2, [1, 0]), np.array([0.5, 0.5]))
    assert out == vec(2, [0, 1, 1])  # smallest of {(0,1,1), (1,0,0)}


def test_syndrome_sum_equals_sum_syndrome_decode():
    rng = np.random.default_rng(12)
    code = km_build(2, 8, 5, rng)
    pz = np.array([0.85, 0.15])
    for _ in range(10):
        s1 = vec(2, rng.integers(0, 2, 8))
        s2 = vec(2, rng.integers(0, 2, 8))
        via_sum = km_sum_decode(code, km_encode(code, s1) + km_encode(code, s2), pz)
        direct = km_sum_decode(code, km_encode(code, s1 + s2), pz)
        assert via_sum == direct


def test_correlated_sum_error_decreases_with_blocklength():
    # symbol sum is Bernoulli(0.1); syndrome rate ~0.8 sits above its entropy,
    # so longer blocks decode the sum more reliably along a fixed seed schedule
    flip = 0.1
    trials = 400

    def error_rate(n, l, seed):
        rng = np.random.default_rng(seed)
        errors = 0
        for t in range(trials):
            code = km_build(2, n, l, np.random.default_rng((seed, t)))
            z = vec(2, (rng.random(n) < flip).astype(np.int64))
            out = km_sum_decode(code, km_encode(code, z), np.array([1 - flip, flip]))
            errors += out != z
        return errors / trials

    small = error_rate(8, 7, seed=0)
    large = error_rate(16, 13, seed=0)
    assert large < small
