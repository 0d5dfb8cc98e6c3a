"""Reference binary BP decoders: flooding and sequential variable-node
scheduling (SVNS) with an arbitrary schedule.

Everything here works on plain Python lists; the accelerated greedy decoder
in :mod:`qrlbp.fast` must reproduce these decisions exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Sequence

import numpy as np

from .channel import L_MAX
from .gf2 import BitVec
from .graph import TannerAdjacency, local_state

# atanh arguments this close to +-1 saturate straight to the clip value
SAT = 1.0 - 1e-15
# beliefs this close to a decision boundary count as tied; the cached fast
# engine and the reference path round such exact ties differently
TIE_TOL = 1e-9


@dataclass(frozen=True)
class BpConfig:
    max_iters: int = 100
    llr_clip: float = L_MAX

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.llr_clip > 0:
            raise ValueError("llr_clip must be positive")


def hard_bit(L: float) -> int:
    """Flip decision for belief ``L``; a tied belief means no flip."""
    return 1 if L < -TIE_TOL else 0


def clip(x: float, lim: float) -> float:
    if x > lim:
        return lim
    if x < -lim:
        return -lim
    return x


def atanh2(x: float, lim: float) -> float:
    """``2 atanh(x)`` clipped to ``[-lim, lim]``."""
    if x >= SAT:
        return lim
    if x <= -SAT:
        return -lim
    return clip(2.0 * math.atanh(x), lim)


def as_bits(v, n: int, what: str = "vector") -> list[int]:
    if isinstance(v, BitVec):
        out = v.to_list()
    else:
        out = [int(b) & 1 for b in np.asarray(v).ravel().tolist()]
    if len(out) != n:
        raise ValueError(f"{what} has length {len(out)}, expected {n}")
    return out


def as_prior(prior, n: int) -> list[float]:
    if np.ndim(prior) == 0:
        return [float(prior)] * n
    out = [float(x) for x in np.asarray(prior, dtype=float).ravel()]
    if len(out) != n:
        raise ValueError(f"prior has length {len(out)}, expected {n}")
    return out


@dataclass
class DecodeResult:
    e_hat: Any
    converged: bool
    iterations: int
    state: Any = field(default=None, repr=False)


class DecoderState:
    """Mutable per-frame state of a binary decoder.

    ``delta`` is the residual ``s ^ H e_hat``, ``w`` its weight and
    ``sigma[i]`` the residual bits on the checks of ``i`` packed with the
    edge weights ``beta``.
    """

    def __init__(self, adj: TannerAdjacency, syndrome, prior, llr_clip: float = L_MAX):
        self.adj = adj
        self.syndrome = as_bits(syndrome, adj.n_checks, "syndrome")
        self.prior = as_prior(prior, adj.n_vars)
        self.llr_clip = llr_clip
        K = adj.n_edges
        ev = adj.edge_var_list
        self.msg_v2c = [clip(self.prior[ev[k]], llr_clip) for k in range(K)]
        self.msg_c2v = [0.0] * K
        self.belief = list(self.prior)
        self.hard = [hard_bit(L) for L in self.belief]
        self.delta = self.recompute_delta()
        self.w = sum(self.delta)
        self.sigma = [local_state(adj, self.delta, i) for i in range(adj.n_vars)]

    def recompute_delta(self) -> list[int]:
        ev = self.adj.edge_var_list
        delta = list(self.syndrome)
        for j, edges in enumerate(self.adj.check_edge_lists):
            for k in edges:
                delta[j] ^= self.hard[ev[k]]
        return delta

    def recompute_sigma(self) -> list[int]:
        return [local_state(self.adj, self.delta, i) for i in range(self.adj.n_vars)]

    @property
    def active(self) -> list[int]:
        return self.adj.active

    def degree(self, i: int) -> int:
        return len(self.adj.var_edge_lists[i])

    def update(self, i: int) -> bool:
        return svns_update(self, i)

    def estimate(self) -> np.ndarray:
        return np.asarray(self.hard, dtype=np.uint8)


def init_state(adj: TannerAdjacency, syndrome, prior, cfg: BpConfig | None = None) -> DecoderState:
    cfg = cfg or BpConfig()
    return DecoderState(adj, syndrome, prior, cfg.llr_clip)


def _c2v(state: DecoderState, k: int) -> float:
    adj = state.adj
    j = adj.edge_check_list[k]
    prod = 1.0
    v2c = state.msg_v2c
    for k2 in adj.check_edge_lists[j]:
        if k2 != k:
            prod *= math.tanh(v2c[k2] / 2.0)
    if state.syndrome[j]:
        prod = -prod
    return atanh2(prod, state.llr_clip)


def cn_message(state: DecoderState, j: int, i: int) -> float:
    """Check-to-variable message on edge ``(j, i)`` from the current v2c messages."""
    adj = state.adj
    for k in adj.check_edge_lists[j]:
        if adj.edge_var_list[k] == i:
            return _c2v(state, k)
    raise ValueError(f"no edge between check {j} and variable {i}")


def flip(state: DecoderState, i: int) -> None:
    """Toggle ``hard[i]`` and patch delta, w and sigma on the affected checks."""
    adj = state.adj
    ec, ev, beta = adj.edge_check_list, adj.edge_var_list, adj.beta_list
    delta, sigma = state.delta, state.sigma
    state.hard[i] ^= 1
    for k in adj.var_edge_lists[i]:
        j = ec[k]
        delta[j] ^= 1
        state.w += 2 * delta[j] - 1
        for k2 in adj.check_edge_lists[j]:
            sigma[ev[k2]] ^= beta[k2]


def svns_update(state: DecoderState, i: int) -> bool:
    edges = state.adj.var_edge_lists[i]
    if not edges:
        return False
    lim = state.llr_clip
    c2v = state.msg_c2v
    for k in edges:
        c2v[k] = _c2v(state, k)
    L = state.prior[i]
    for k in edges:
        L += c2v[k]
    v2c = state.msg_v2c
    for k in edges:
        v2c[k] = clip(L - c2v[k], lim)
    state.belief[i] = L
    if (hard_bit(L)) != state.hard[i]:
        flip(state, i)
        return True
    return False


# ---------------------------------------------------------------------------
# schedules: callables (state, active) -> iterator of variable indices,
# consumed lazily so a schedule may inspect the state between picks.

Schedule = Callable[[Any, Sequence[int]], Iterator[int]]


def index_schedule(state, active: Sequence[int]) -> Iterator[int]:
    yield from active


def random_schedule(rng: np.random.Generator) -> Schedule:
    def order(state, active):
        for pos in rng.permutation(len(active)).tolist():
            yield active[pos]

    return order


def run_sequential(
    state,
    schedule: Schedule,
    max_iters: int,
    trace: list | None = None,
) -> tuple[bool, int]:
    """Drive a sequential decoder state until ``w == 0`` or the cap.

    Returns ``(converged, iterations)`` where ``iterations`` counts the
    passes that performed at least one update.
    """
    active = state.active
    for it in range(1, max_iters + 1):
        if state.w == 0:
            return True, it - 1
        for a in schedule(state, active):
            if state.w == 0:
                return True, it
            flipped = state.update(a)
            if trace is not None:
                trace.append((a, flipped, state.w))
    return state.w == 0, max_iters


def decode_svns(
    adj: TannerAdjacency,
    syndrome,
    prior,
    cfg: BpConfig | None = None,
    schedule: Schedule = index_schedule,
    trace: list | None = None,
) -> DecodeResult:
    cfg = cfg or BpConfig()
    state = init_state(adj, syndrome, prior, cfg)
    converged, iters = run_sequential(state, schedule, cfg.max_iters, trace)
    return DecodeResult(state.estimate(), converged, iters, state)


def flooding_round(state: DecoderState) -> None:
    adj = state.adj
    lim = state.llr_clip
    c2v, v2c = state.msg_c2v, state.msg_v2c
    x = [math.tanh(m / 2.0) for m in v2c]
    for j, edges in enumerate(adj.check_edge_lists):
        sign = -1.0 if state.syndrome[j] else 1.0
        for k in edges:
            prod = sign
            for k2 in edges:
                if k2 != k:
                    prod *= x[k2]
            c2v[k] = atanh2(prod, lim)
    for i, edges in enumerate(adj.var_edge_lists):
        if not edges:
            continue
        L = state.prior[i]
        for k in edges:
            L += c2v[k]
        for k in edges:
            v2c[k] = clip(L - c2v[k], lim)
        state.belief[i] = L
        state.hard[i] = hard_bit(L)
    state.delta = state.recompute_delta()
    state.w = sum(state.delta)
    state.sigma = state.recompute_sigma()


def run_flooding(state, round_fn, max_iters: int) -> tuple[bool, int]:
    if state.w == 0:
        return True, 0
    for it in range(1, max_iters + 1):
        round_fn(state)
        if state.w == 0:
            return True, it
    return False, max_iters


def decode_flooding(adj: TannerAdjacency, syndrome, prior, cfg: BpConfig | None = None) -> DecodeResult:
    cfg = cfg or BpConfig()
    state = init_state(adj, syndrome, prior, cfg)
    converged, iters = run_flooding(state, flooding_round, cfg.max_iters)
    return DecodeResult(state.estimate(), converged, iters, state)
