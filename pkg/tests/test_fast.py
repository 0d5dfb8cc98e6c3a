from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrlbp.bp import BpConfig, decode_svns, init_state, svns_update
from qrlbp.channel import llr, sample_bitflip, trial_rng
from qrlbp.fast import (
    CheckCache,
    FastEngine,
    SchedulerHeap,
    decode_fast,
    fast_svns_step,
    prod_excl,
    update_cache_after_v2c,
)
from qrlbp.gf2 import BitMatrix, mat_vec_mul
from qrlbp.graph import build_adjacency, second_order_neighborhood
from qrlbp.rl import QTable, TrainConfig, binary_qtable, greedy_schedule, train


def cache_for(xs):
    adj = build_adjacency(BitMatrix.from_array([[1] * len(xs)]))
    v2c = [2 * math.atanh(x) for x in xs]
    return CheckCache(adj, v2c)


def test_prod_excl_examples():
    single = cache_for([0.4])
    assert prod_excl(single, 0, 0) == pytest.approx(1.0)
    c = cache_for([0.5, 0.5, 0.5])
    assert prod_excl(c, 0, 1) == pytest.approx(0.25, rel=1e-15)
    assert prod_excl(c, 0, 1) == pytest.approx(c.direct(0, skip=1), rel=1e-15)
    z = cache_for([0.0, 0.5, 0.25])
    assert z.prod[0] == 0.0
    assert prod_excl(z, 0, 0) == pytest.approx(0.125) and z.fallbacks == 1


def test_update_cache_examples():
    c = cache_for([0.3])
    x0 = c.x[0]
    update_cache_after_v2c(c, 0, 0, x0, x0)
    assert c.prod[0] == x0
    update_cache_after_v2c(c, 0, 0, x0, 2 * x0)
    assert c.prod[0] == pytest.approx(2 * x0, rel=1e-15)
    with pytest.raises(ValueError):
        update_cache_after_v2c(c, 0, 0, x0, 0.1)
    z = cache_for([0.0, 0.5])
    update_cache_after_v2c(z, 0, 0, z.x[0], 0.8)
    assert z.prod[0] == pytest.approx(0.4) and z.ratio_updates[0] == 0


@given(st.integers(0, 2**32 - 1))
def test_ratio_updates_track_direct_product(seed):
    rng = np.random.default_rng(seed)
    c = cache_for(list(rng.uniform(-0.99, 0.99, 6)))
    for _ in range(300):
        k = int(rng.integers(6))
        c.set_edge(0, k, float(rng.uniform(-0.99, 0.99)))
        d = c.direct(0)
        assert abs(c.prod[0] - d) <= 1e-9 * abs(d)
    c.rebuild(0)
    assert c.prod[0] == c.direct(0)


@given(st.lists(st.tuples(st.sampled_from("bpc"), st.integers(0, 15), st.integers(-3, 3)), max_size=80))
def test_heap_matches_sorted_model(ops):
    n = 16
    h = SchedulerHeap(n)
    keys = {u: float(u % 4) for u in range(n)}
    h.build(list(range(n)), [keys[u] for u in range(n)])
    live = dict(keys)
    for op, u, k in ops:
        if not live:
            break
        if op == "p":
            want = min(live, key=lambda v: (-live[v], v))
            assert h.pop() == want
            del live[want]
        elif op == "c" and u in live:
            live[u] = float(k)
            h.change_key(u, float(k))
        assert h.check()
        assert set(h.heap) == set(live)
        if live:
            assert h.peek() == min(live, key=lambda v: (-live[v], v))


def random_table(adj, rng, scale=3):
    q = binary_qtable(adj)
    for i in range(adj.n_vars):
        for s in range(2 ** int(adj.var_degree[i])):
            if rng.random() < 0.7:
                q[s, i] = float(rng.integers(-scale, scale + 1))
    return q


def test_step_matches_reference_update(toric3):
    adj = build_adjacency(toric3.h_a)
    rng = np.random.default_rng(0)
    q = QTable(16, 18)
    for _ in range(200):
        syn = (rng.random(9) < 0.4).astype(int)
        prior = rng.uniform(-2, 5, 18)
        ref = init_state(adj, syn, prior)
        eng = FastEngine(adj, q, syn, prior)
        eng.begin_iteration()
        for a in rng.integers(0, 18, 30).tolist():
            f1 = svns_update(ref, a)
            f2 = fast_svns_step(eng, a)
            assert f1 == f2
            assert eng.belief[a] == pytest.approx(ref.belief[a], abs=1e-12)
            assert np.allclose(eng.msg_v2c, ref.msg_v2c, rtol=0, atol=1e-12)
            assert eng.hard == ref.hard and eng.delta == ref.delta
            assert eng.sigma == ref.sigma and eng.w == ref.w


def test_zero_degree_step_and_worked_example():
    from tests.test_bp import EXAMPLE_H

    adj = build_adjacency(EXAMPLE_H)
    eng = FastEngine(adj, binary_qtable(adj), [1, 0, 1, 0, 1], 5.0)
    assert eng.sigma == [1, 3, 1, 2]
    eng.on_flip(0)
    assert eng.sigma == [2, 2, 2, 3]
    iso = build_adjacency(BitMatrix.from_array([[1, 1, 0]]))
    e2 = FastEngine(iso, QTable(2, 3), [1], 2.0)
    assert fast_svns_step(e2, 2) is False


def test_on_flip_locality_and_heap_keys(toric3):
    adj = build_adjacency(toric3.h_a)
    rng = np.random.default_rng(5)
    q = random_table(adj, rng)
    for _ in range(1000 // 20):
        syn = (rng.random(9) < 0.5).astype(int)
        eng = FastEngine(adj, q, syn, 3.0)
        eng.begin_iteration()
        for _ in range(20):
            a = int(rng.integers(18))
            before_sigma = list(eng.sigma)
            before_keys = list(eng.heap.key)
            w0 = eng.w
            all_unsat = all(eng.delta[adj.edge_check_list[k]] for k in adj.var_edge_lists[a])
            eng.on_flip(a)
            if all_unsat:
                assert eng.w == w0 - len(adj.var_edge_lists[a])
            aff = second_order_neighborhood(adj, a)
            assert {u for u in range(18) if eng.sigma[u] != before_sigma[u]} <= aff
            assert {u for u in range(18) if eng.heap.key[u] != before_keys[u]} <= aff
            ref = init_state(adj, syn, 3.0)
            ref.hard = list(eng.hard)
            ref.delta = ref.recompute_delta()
            assert eng.delta == ref.delta and eng.w == sum(ref.delta)
            assert eng.sigma == ref.recompute_sigma()
            for u in eng.heap.heap:
                assert eng.heap.key[u] == q[eng.sigma[u], u]


def test_step_write_set_and_cost(toric3):
    adj = build_adjacency(toric3.h_a)
    rng = np.random.default_rng(2)
    q = random_table(adj, rng)
    for t in range(50):
        e = sample_bitflip(18, 0.1, trial_rng(3, t))
        eng = FastEngine(adj, q, mat_vec_mul(toric3.h_a, e), llr(0.1))
        eng.begin_iteration()
        while len(eng.heap):
            a = eng.pop_next()
            v2c0, prod0, sig0 = list(eng.msg_v2c), list(eng.cache.prod), list(eng.sigma)
            ops0 = eng.ops
            eng.step(a)
            edges = set(adj.var_edge_lists[a])
            checks = {adj.edge_check_list[k] for k in edges}
            assert {k for k in range(adj.n_edges) if eng.msg_v2c[k] != v2c0[k]} <= edges
            assert {j for j in range(9) if eng.cache.prod[j] != prod0[j]} <= checks
            assert {u for u in range(18) if eng.sigma[u] != sig0[u]} <= second_order_neighborhood(adj, a)
            bound = len(edges) + sum(len(adj.check_edge_lists[j]) for j in checks)
            assert eng.ops - ops0 <= bound


def test_decode_fast_basics(steane_adj):
    q = QTable(8, 7)
    r = decode_fast(steane_adj, q, [0, 0, 0], 3.0)
    assert r.converged and r.iterations == 0
    adj = build_adjacency(BitMatrix.from_array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1], [1, 0, 0, 1]]))
    r = decode_fast(adj, QTable(4, 4), [1, 0, 0, 0], 3.0, BpConfig(4))
    assert not r.converged and r.iterations == 4


def test_trained_table_trajectories_match(steane, steane_adj):
    q = train(steane, steane_adj, TrainConfig(episodes=500, seed=8))
    for t in range(500):
        e = sample_bitflip(7, 0.07, trial_rng(4, t))
        s = mat_vec_mul(steane.h_a, e)
        t1, t2 = [], []
        a = decode_svns(steane_adj, s, llr(0.07), BpConfig(20), greedy_schedule(q), t1)
        b = decode_fast(steane_adj, q, s, llr(0.07), BpConfig(20), t2)
        assert t1 == t2 and list(a.e_hat) == list(b.e_hat) and a.iterations == b.iterations
