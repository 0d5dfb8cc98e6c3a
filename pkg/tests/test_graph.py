from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrlbp.codes import get_code
from qrlbp.gf2 import BitMatrix
from qrlbp.graph import build_adjacency, local_state, second_order_neighborhood


@given(st.integers(1, 8), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_adjacency_roundtrip_and_ordering(m, n, seed):
    rng = np.random.default_rng(seed)
    h = BitMatrix.from_array(rng.random((m, n)) < 0.4)
    adj = build_adjacency(h)
    assert adj.to_matrix() == h
    assert adj.n_edges == h.nnz()
    arr = h.to_array()
    assert np.array_equal(adj.var_degree, arr.sum(axis=0))
    assert np.array_equal(adj.check_degree, arr.sum(axis=1))
    for i in range(n):
        edges = adj.var_neighbors(i)
        checks = adj.edge_check[edges]
        assert list(checks) == sorted(checks)
        assert list(adj.beta[edges]) == [1 << t for t in range(len(edges))]
    for j in range(m):
        assert all(adj.edge_check[k] == j for k in adj.check_neighbors(j))


def test_pointer_arrays_are_prefix_sums(steane_adj):
    assert steane_adj.cn_ptr[0] == 0 and steane_adj.cn_ptr[-1] == steane_adj.n_edges
    assert list(steane_adj.cn_ptr) == [0, 4, 8, 12]
    assert steane_adj.a_max == 3


def test_out_of_range_neighbors(steane_adj):
    with pytest.raises(IndexError):
        steane_adj.check_neighbors(3)
    with pytest.raises(IndexError):
        steane_adj.var_neighbors(-1)


def test_degree_zero_variable():
    adj = build_adjacency(BitMatrix.from_array([[1, 1, 0]]))
    assert adj.active == [0, 1]
    assert len(adj.var_neighbors(2)) == 0


def test_second_order_neighborhood(steane_adj):
    # variable 6 touches every Hamming check
    assert second_order_neighborhood(steane_adj, 6) == set(range(7))
    assert second_order_neighborhood(steane_adj, 0) == {0, 2, 4, 6}


def test_local_state_formula():
    adj = build_adjacency(get_code("toric3").h_a)
    rng = np.random.default_rng(3)
    for _ in range(20):
        delta = (rng.random(adj.n_checks) < 0.5).astype(int)
        for i in range(adj.n_vars):
            want = sum(int(delta[adj.edge_check[k]]) << t for t, k in enumerate(adj.var_neighbors(i)))
            assert local_state(adj, delta, i) == want
