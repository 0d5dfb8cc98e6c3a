"""Accelerated greedy RL-SVNS inference.

Per-check cached tanh products with ratio updates, residual/state/priority
maintenance restricted to the second-order neighbourhood of a flipped
variable, and an indexed max-heap for the greedy pick. Decisions are meant
to be identical to ``decode_svns(..., schedule=greedy_schedule(q))``.
"""

from __future__ import annotations

import math

import numpy as np

from .bp import BpConfig, DecodeResult, as_bits, as_prior, atanh2, clip, hard_bit
from .graph import TannerAdjacency, local_state
from .quaternary import QuatState, _vn_update, hard_decision
from .rl import QTable

EPS_TH = 1e-12
REBUILD_EVERY = 4096


class SchedulerHeap:
    """Max-heap of variable indices with change-key.

    Items are ordered by ``(key, -index)`` so equal keys resolve to the
    lowest index.
    """

    def __init__(self, n: int):
        self.heap: list[int] = []
        self.pos = [-1] * n
        self.key = [0.0] * n

    def __len__(self) -> int:
        return len(self.heap)

    def __contains__(self, u: int) -> bool:
        return self.pos[u] >= 0

    def _above(self, a: int, b: int) -> bool:
        ka, kb = self.key[a], self.key[b]
        return ka > kb or (ka == kb and a < b)

    def _place(self, idx: int, u: int) -> None:
        self.heap[idx] = u
        self.pos[u] = idx

    def _sift_up(self, idx: int) -> None:
        heap = self.heap
        u = heap[idx]
        while idx > 0:
            parent = (idx - 1) >> 1
            p = heap[parent]
            if not self._above(u, p):
                break
            self._place(idx, p)
            idx = parent
        self._place(idx, u)

    def _sift_down(self, idx: int) -> None:
        heap = self.heap
        size = len(heap)
        u = heap[idx]
        while True:
            child = 2 * idx + 1
            if child >= size:
                break
            right = child + 1
            if right < size and self._above(heap[right], heap[child]):
                child = right
            c = heap[child]
            if not self._above(c, u):
                break
            self._place(idx, c)
            idx = child
        self._place(idx, u)

    def build(self, items, keys) -> None:
        for u in self.heap:
            self.pos[u] = -1
        self.heap = list(items)
        for idx, u in enumerate(self.heap):
            self.pos[u] = idx
            self.key[u] = keys[idx]
        for idx in range(len(self.heap) // 2 - 1, -1, -1):
            self._sift_down(idx)

    def peek(self) -> int:
        return self.heap[0]

    def pop(self) -> int:
        heap = self.heap
        top = heap[0]
        last = heap.pop()
        self.pos[top] = -1
        if heap:
            self._place(0, last)
            self._sift_down(0)
        return top

    def change_key(self, u: int, key: float) -> None:
        old = self.key[u]
        self.key[u] = key
        idx = self.pos[u]
        if key > old:
            self._sift_up(idx)
        elif key < old:
            self._sift_down(idx)

    def check(self) -> bool:
        """Heap-order and position-index invariants."""
        for idx, u in enumerate(self.heap):
            if self.pos[u] != idx:
                return False
            if idx and self._above(u, self.heap[(idx - 1) >> 1]):
                return False
        return sum(p >= 0 for p in self.pos) == len(self.heap)


class CheckCache:
    """``x[k] = tanh(m_k / 2)`` per edge and ``prod[j]`` per check."""

    def __init__(self, adj: TannerAdjacency, v2c, eps_th: float = EPS_TH, rebuild_every: int = REBUILD_EVERY):
        self.adj = adj
        self.eps_th = eps_th
        self.rebuild_every = rebuild_every
        self.x = [math.tanh(m / 2.0) for m in v2c]
        self.prod = [self.direct(j) for j in range(adj.n_checks)]
        self.ratio_updates = [0] * adj.n_checks
        self.fallbacks = 0

    def direct(self, j: int, skip: int = -1) -> float:
        p = 1.0
        x = self.x
        for k in self.adj.check_edge_lists[j]:
            if k != skip:
                p *= x[k]
        return p

    def rebuild(self, j: int) -> None:
        self.prod[j] = self.direct(j)
        self.ratio_updates[j] = 0

    def prod_excl(self, j: int, k: int) -> float:
        xk = self.x[k]
        if abs(xk) > self.eps_th:
            return self.prod[j] / xk
        self.fallbacks += 1
        return self.direct(j, skip=k)

    def set_edge(self, j: int, k: int, x_new: float) -> None:
        x_old = self.x[k]
        self.x[k] = x_new
        if x_new == x_old:
            return
        if abs(x_old) > self.eps_th:
            self.prod[j] *= x_new / x_old
            self.ratio_updates[j] += 1
            if self.ratio_updates[j] >= self.rebuild_every:
                self.rebuild(j)
        else:
            self.fallbacks += 1
            self.rebuild(j)


def prod_excl(cache: CheckCache, j: int, k: int) -> float:
    return cache.prod_excl(j, k)


def update_cache_after_v2c(cache: CheckCache, j: int, k: int, x_old: float, x_new: float) -> None:
    if cache.x[k] != x_old:
        raise ValueError("cache is not at the stated old value for this edge")
    cache.set_edge(j, k, x_new)


class FastEngine:
    """Incremental greedy RL-SVNS decoder for one frame.

    ``ops`` counts edge visits inside scheduling steps; it is an
    instrumentation hook for the per-step cost bound.
    """

    def __init__(self, adj: TannerAdjacency, q: QTable, syndrome, prior, cfg: BpConfig | None = None):
        cfg = cfg or BpConfig()
        self.adj = adj
        self.q = q
        self.cfg = cfg
        self.lim = cfg.llr_clip
        n = adj.n_vars
        self.syndrome = as_bits(syndrome, adj.n_checks, "syndrome")
        self.prior = as_prior(prior, n)
        ev = adj.edge_var_list
        self.msg_v2c = [clip(self.prior[ev[k]], self.lim) for k in range(adj.n_edges)]
        self.msg_c2v = [0.0] * adj.n_edges
        self.cache = CheckCache(adj, self.msg_v2c)
        self.belief = list(self.prior)
        self.hard = [hard_bit(L) for L in self.belief]
        delta = list(self.syndrome)
        for j, edges in enumerate(adj.check_edge_lists):
            for k in edges:
                delta[j] ^= self.hard[ev[k]]
        self.delta = delta
        self.w = sum(delta)
        self.sigma = [local_state(adj, delta, i) for i in range(n)]
        self.heap = SchedulerHeap(n)
        self.ops = 0

    def key(self, u: int) -> float:
        return self.q.values.get((self.sigma[u], u), 0.0)

    def begin_iteration(self) -> None:
        active = self.adj.active
        self.heap.build(active, [self.key(u) for u in active])

    def pop_next(self) -> int:
        return self.heap.pop()

    def step(self, a: int) -> bool:
        adj = self.adj
        edges = adj.var_edge_lists[a]
        if not edges:
            return False
        ec = adj.edge_check_list
        cache = self.cache
        lim = self.lim
        c2v, v2c = self.msg_c2v, self.msg_v2c
        syn = self.syndrome
        for k in edges:
            j = ec[k]
            pe = cache.prod_excl(j, k)
            c2v[k] = atanh2(-pe if syn[j] else pe, lim)
        L = self.prior[a]
        for k in edges:
            L += c2v[k]
        for k in edges:
            m = clip(L - c2v[k], lim)
            v2c[k] = m
            cache.set_edge(ec[k], k, math.tanh(m / 2.0))
        self.ops += len(edges)
        self.belief[a] = L
        if (hard_bit(L)) != self.hard[a]:
            self.on_flip(a)
            return True
        return False

    def on_flip(self, a: int) -> None:
        adj = self.adj
        ec, ev, beta = adj.edge_check_list, adj.edge_var_list, adj.beta_list
        delta, sigma = self.delta, self.sigma
        self.hard[a] ^= 1
        touched = []
        for k in adj.var_edge_lists[a]:
            j = ec[k]
            delta[j] ^= 1
            self.w += 2 * delta[j] - 1
            for k2 in adj.check_edge_lists[j]:
                u = ev[k2]
                sigma[u] ^= beta[k2]
                touched.append(u)
            self.ops += len(adj.check_edge_lists[j])
        heap = self.heap
        for u in set(touched):
            if u in heap:
                heap.change_key(u, self.key(u))

    def decode(self, trace: list | None = None) -> tuple[bool, int]:
        for it in range(1, self.cfg.max_iters + 1):
            if self.w == 0:
                return True, it - 1
            self.begin_iteration()
            while len(self.heap):
                if self.w == 0:
                    return True, it
                a = self.pop_next()
                flipped = self.step(a)
                if trace is not None:
                    trace.append((a, flipped, self.w))
        return self.w == 0, self.cfg.max_iters

    def estimate(self) -> np.ndarray:
        return np.asarray(self.hard, dtype=np.uint8)


def decode_fast(
    adj: TannerAdjacency,
    q: QTable,
    syndrome,
    prior,
    cfg: BpConfig | None = None,
    trace: list | None = None,
) -> DecodeResult:
    engine = FastEngine(adj, q, syndrome, prior, cfg)
    converged, iters = engine.decode(trace)
    return DecodeResult(engine.estimate(), converged, iters, engine)


class QuatFastEngine(QuatState):
    """Greedy two-stream decoder with per-stream check caches and one heap.

    A component flip refreshes heap keys over the second-order neighbourhood
    on the graph of that component; both flipping touches the union.
    """

    def __init__(self, adj_x, adj_z, q: QTable, syndromes, prior, cfg: BpConfig | None = None, **kw):
        cfg = cfg or BpConfig()
        super().__init__(adj_x, adj_z, syndromes, prior, cfg.llr_clip, **kw)
        self.q = q
        self.cfg = cfg
        self.cache_x = CheckCache(adj_x, self.v2c_x)
        self.cache_z = CheckCache(adj_z, self.v2c_z)
        self.heap = SchedulerHeap(self.n)
        self._touched: list[int] = []

    def key(self, u: int) -> float:
        return self.q.values.get((self.sigma[u], u), 0.0)

    def begin_iteration(self) -> None:
        self.heap.build(self.active, [self.key(u) for u in self.active])

    def _refresh(self, adj, cache, v2c, c2v, syn, edges) -> None:
        ec = adj.edge_check_list
        for k in edges:
            j = ec[k]
            pe = cache.prod_excl(j, k)
            c2v[k] = atanh2(-pe if syn[j] else pe, self.lim)

    def update(self, i: int) -> tuple[bool, bool]:
        ex = self.adj_x.var_edge_lists[i]
        ez = self.adj_z.var_edge_lists[i]
        if not ex and not ez:
            return False, False
        self._refresh(self.adj_x, self.cache_x, self.v2c_x, self.c2v_x, self.syn_x, ex)
        self._refresh(self.adj_z, self.cache_z, self.v2c_z, self.c2v_z, self.syn_z, ez)
        L_x, L_z = _vn_update(self, i)
        for adj, cache, v2c, edges in ((self.adj_x, self.cache_x, self.v2c_x, ex), (self.adj_z, self.cache_z, self.v2c_z, ez)):
            ec = adj.edge_check_list
            for k in edges:
                cache.set_edge(ec[k], k, math.tanh(v2c[k] / 2.0))
        self._touched = []
        flips = self.set_decision(i, hard_decision(self.log_kappa, L_z, L_x))
        heap = self.heap
        for u in set(self._touched):
            if u in heap:
                heap.change_key(u, self.key(u))
        return flips

    def _flip_checks(self, adj, delta, i: int, shift: int) -> None:
        super()._flip_checks(adj, delta, i, shift)
        ev = adj.edge_var_list
        for k in adj.var_edge_lists[i]:
            for k2 in adj.check_edge_lists[adj.edge_check_list[k]]:
                self._touched.append(ev[k2])

    def decode(self, trace: list | None = None) -> tuple[bool, int]:
        for it in range(1, self.cfg.max_iters + 1):
            if self.w == 0:
                return True, it - 1
            self.begin_iteration()
            while len(self.heap):
                if self.w == 0:
                    return True, it
                a = self.heap.pop()
                flips = self.update(a)
                if trace is not None:
                    trace.append((a, flips, self.w))
        return self.w == 0, self.cfg.max_iters


def decode_quat_fast(adj_x, adj_z, q: QTable, syndromes, prior, cfg: BpConfig | None = None, trace=None, **kw) -> DecodeResult:
    engine = QuatFastEngine(adj_x, adj_z, q, syndromes, prior, cfg, **kw)
    converged, iters = engine.decode(trace)
    return DecodeResult(engine.estimate(), converged, iters, engine)


def fast_svns_step(engine: FastEngine, a: int) -> bool:
    return engine.step(a)


def on_flip(engine: FastEngine, a: int) -> None:
    engine.on_flip(a)
