from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrlbp.gf2 import BitMatrix, BitVec, in_row_space, mat_mul, mat_vec_mul, rank, symplectic_check


def dense_rank(a: np.ndarray) -> int:
    """Plain row reduction on a uint8 array, written independently of the bitset code."""
    a = a.copy() % 2
    r = 0
    for c in range(a.shape[1]):
        piv = next((i for i in range(r, a.shape[0]) if a[i, c]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(a.shape[0]):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
    return r


matrices = st.integers(1, 9).flatmap(
    lambda m: st.integers(1, 12).flatmap(
        lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


def test_bitvec_roundtrip():
    v = BitVec.from_str("0110001")
    assert str(v) == "0110001"
    assert v.to_list() == [0, 1, 1, 0, 0, 0, 1]
    assert BitVec.from_array(v.to_array()) == v
    assert v.weight == 3 and v[1] == 1 and v[0] == 0


def test_bitvec_xor_length_mismatch():
    with pytest.raises(ValueError):
        BitVec.zeros(3) ^ BitVec.zeros(4)


def test_matvec_zero_and_unit():
    h = BitMatrix.from_array([[1, 0, 1], [0, 1, 1]])
    assert mat_vec_mul(h, BitVec.zeros(3)) == BitVec.zeros(2)
    for i in range(3):
        assert mat_vec_mul(h, BitVec.unit(3, i)) == h.column(i)


def test_matvec_dimension_mismatch():
    with pytest.raises(ValueError):
        mat_vec_mul(BitMatrix.identity(3), BitVec.zeros(4))


@given(matrices, st.data())
def test_matvec_matches_numpy(rows, data):
    a = np.array(rows, dtype=np.uint8)
    v = np.array(data.draw(st.lists(st.integers(0, 1), min_size=a.shape[1], max_size=a.shape[1])), dtype=np.uint8)
    got = mat_vec_mul(BitMatrix.from_array(a), v).to_array()
    assert np.array_equal(got, (a.astype(int) @ v) % 2)


@given(matrices)
def test_rank_matches_dense_elimination(rows):
    a = np.array(rows, dtype=np.uint8)
    assert rank(BitMatrix.from_array(a)) == dense_rank(a)


@given(matrices, st.data())
def test_row_space_membership(rows, data):
    a = np.array(rows, dtype=np.uint8)
    m = BitMatrix.from_array(a)
    coeffs = np.array(data.draw(st.lists(st.integers(0, 1), min_size=a.shape[0], max_size=a.shape[0])))
    combo = (coeffs @ a) % 2
    assert in_row_space(m, combo)
    other = np.array(data.draw(st.lists(st.integers(0, 1), min_size=a.shape[1], max_size=a.shape[1])))
    stacked = np.vstack([a, other])
    assert in_row_space(m, other) == (dense_rank(stacked) == dense_rank(a))


def test_rank_examples():
    assert rank(BitMatrix.identity(5)) == 5
    assert rank(BitMatrix.zeros(3, 4)) == 0
    assert rank(BitMatrix.from_array([[1, 1], [1, 1]])) == 1


def test_mat_mul_and_transpose():
    rng = np.random.default_rng(1)
    a = (rng.random((4, 6)) < 0.5).astype(np.uint8)
    b = (rng.random((6, 3)) < 0.5).astype(np.uint8)
    got = mat_mul(BitMatrix.from_array(a), BitMatrix.from_array(b)).to_array()
    assert np.array_equal(got, (a.astype(int) @ b) % 2)
    assert np.array_equal(BitMatrix.from_array(a).transpose().to_array(), a.T)


def test_symplectic_check():
    h = BitMatrix.from_array([[1, 1, 0], [0, 1, 1]])
    assert symplectic_check(h, BitMatrix.from_array([[1, 1, 1]])) is True
    assert symplectic_check(h, BitMatrix.from_array([[1, 0, 0]])) is False
    assert symplectic_check(h, BitMatrix.from_array([[1, 1, 0]])) is False
    assert symplectic_check(BitMatrix.from_array([[1, 1, 0, 0]]), BitMatrix.from_array([[1, 1, 1, 1]]))
    with pytest.raises(ValueError):
        symplectic_check(h, BitMatrix.identity(4))
