"""Two-stream SVNS decoding for depolarizing noise.

Stream ``x`` lives on the Tanner graph of ``code.h_a`` and carries the
component bit ``e_x = 1[q in {Y, Z}]``; stream ``z`` lives on ``code.h_b``
and carries ``e_z = 1[q in {X, Y}]``. The streams exchange scalar LLRs and
are coupled at every variable through the joint-prior correction kappa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bp import TIE_TOL, DecodeResult, BpConfig, as_bits, as_prior, atanh2, clip, random_schedule, run_flooding, run_sequential, index_schedule
from .channel import L_MAX, as_rng, llr, sample_depolarizing, syndrome as frame_syndrome
from .codes import CssCode
from .graph import TannerAdjacency, local_state
from .rl import QTable, TrainConfig, TrainStats, greedy_schedule, train_generic

PAULIS = ("I", "X", "Y", "Z")
# component bits per Pauli index, in PAULIS order
E_X = (0, 0, 1, 1)
E_Z = (0, 1, 1, 0)


@dataclass(frozen=True)
class DepolPrior:
    p: float
    mu_dep: float
    pi_x: tuple[float, float]
    pi_z: tuple[float, float]
    pi: tuple[float, float, float, float]
    kappa: tuple[float, float, float, float]

    @classmethod
    def from_p(cls, p: float) -> DepolPrior:
        if not 0 <= p < 0.75:
            raise ValueError(f"depolarizing p must lie in [0, 0.75), got {p}")
        m1 = 2 * p / 3
        pi_x = pi_z = (1 - m1, m1)
        pi = (1 - p, p / 3, p / 3, p / 3)
        if p == 0:
            # every marginal of a non-identity Pauli vanishes; kappa is moot
            kappa = (1.0, 1.0, 1.0, 1.0)
        else:
            kappa = tuple(pi[q] / (pi_x[E_X[q]] * pi_z[E_Z[q]]) for q in range(4))
        return cls(p, llr(m1), pi_x, pi_z, pi, kappa)

    @property
    def log_kappa(self) -> tuple[float, ...]:
        return tuple(math.log(k) for k in self.kappa)


def logaddexp(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    if b == -math.inf:
        return a
    return a + math.log1p(math.exp(b - a))


def log_phi(q: int, L_z: float, L_x: float) -> float:
    return 0.5 * (1 - 2 * E_Z[q]) * L_z + 0.5 * (1 - 2 * E_X[q]) * L_x


def phi(q: int | str, L_z: float, L_x: float) -> float:
    if isinstance(q, str):
        q = PAULIS.index(q)
    return math.exp(log_phi(q, L_z, L_x))


def log_scores(log_kappa, L_z: float, L_x: float) -> list[float]:
    hz, hx = 0.5 * L_z, 0.5 * L_x
    lk = log_kappa
    return [lk[0] + hz + hx, lk[1] - hz + hx, lk[2] - hz - hx, lk[3] + hz - hx]


def belief(log_kappa, L_z: float, L_x: float) -> list[float]:
    """Normalised quaternary belief ``B(q)`` in PAULIS order."""
    s = log_scores(log_kappa, L_z, L_x)
    top = max(s)
    e = [math.exp(v - top) for v in s]
    tot = sum(e)
    return [v / tot for v in e]


def hard_decision(log_kappa, L_z: float, L_x: float) -> int:
    """Index of the most likely Pauli; ties go to the earliest in PAULIS.

    Scores within ``TIE_TOL`` of the maximum count as tied. Some ties are
    exact (e.g. X against Y whenever ``L_x`` equals the prior), and this
    keeps the outcome independent of last-digit rounding.
    """
    s = log_scores(log_kappa, L_z, L_x)
    top = max(s)
    for q in range(4):
        if s[q] >= top - TIE_TOL:
            return q
    return 0


def msg_x(log_kappa, L_z: float, L_x_ext: float) -> float:
    """Outgoing x-stream LLR: log (B(I)+B(X)) / (B(Y)+B(Z))."""
    hz, hx = 0.5 * L_z, 0.5 * L_x_ext
    lk = log_kappa
    return logaddexp(lk[0] + hz + hx, lk[1] - hz + hx) - logaddexp(lk[2] - hz - hx, lk[3] + hz - hx)


def msg_z(log_kappa, L_z_ext: float, L_x: float) -> float:
    """Outgoing z-stream LLR: log (B(I)+B(Z)) / (B(X)+B(Y))."""
    hz, hx = 0.5 * L_z_ext, 0.5 * L_x
    lk = log_kappa
    return logaddexp(lk[0] + hz + hx, lk[3] + hz - hx) - logaddexp(lk[1] - hz + hx, lk[2] - hz - hx)


def _c2v(adj: TannerAdjacency, v2c, syndrome, k: int, lim: float) -> float:
    j = adj.edge_check_list[k]
    prod = 1.0
    for k2 in adj.check_edge_lists[j]:
        if k2 != k:
            prod *= math.tanh(v2c[k2] / 2.0)
    if syndrome[j]:
        prod = -prod
    return atanh2(prod, lim)


class QuatState:
    """Per-frame state of the two-stream decoder.

    ``sigma[i]`` is the joint state ``sigma_x + 2**a_max * sigma_z`` with a
    shared padding length ``a_max`` over both graphs.
    """

    def __init__(
        self,
        adj_x: TannerAdjacency,
        adj_z: TannerAdjacency,
        syndromes,
        prior: DepolPrior,
        llr_clip: float = L_MAX,
        mu_x=None,
        mu_z=None,
        log_kappa=None,
    ):
        if adj_x.n_vars != adj_z.n_vars:
            raise ValueError("stream graphs disagree on n")
        n = adj_x.n_vars
        self.adj_x, self.adj_z = adj_x, adj_z
        self.n = n
        self.syn_x = as_bits(syndromes[0], adj_x.n_checks, "x-stream syndrome")
        self.syn_z = as_bits(syndromes[1], adj_z.n_checks, "z-stream syndrome")
        self.prior = prior
        self.lim = llr_clip
        self.log_kappa = tuple(log_kappa) if log_kappa is not None else prior.log_kappa
        self.mu_x = as_prior(prior.mu_dep if mu_x is None else mu_x, n)
        self.mu_z = as_prior(prior.mu_dep if mu_z is None else mu_z, n)
        evx, evz = adj_x.edge_var_list, adj_z.edge_var_list
        self.v2c_x = [clip(self.mu_x[evx[k]], llr_clip) for k in range(adj_x.n_edges)]
        self.v2c_z = [clip(self.mu_z[evz[k]], llr_clip) for k in range(adj_z.n_edges)]
        self.c2v_x = [0.0] * adj_x.n_edges
        self.c2v_z = [0.0] * adj_z.n_edges
        self.L_x = list(self.mu_x)
        self.L_z = list(self.mu_z)
        self.qhat = [hard_decision(self.log_kappa, self.L_z[i], self.L_x[i]) for i in range(n)]
        self.e_x = [E_X[q] for q in self.qhat]
        self.e_z = [E_Z[q] for q in self.qhat]
        self.a_max = max(adj_x.a_max, adj_z.a_max)
        self.delta_x = self._residual(adj_x, self.syn_x, self.e_x)
        self.delta_z = self._residual(adj_z, self.syn_z, self.e_z)
        self.w = sum(self.delta_x) + sum(self.delta_z)
        self.sigma = self.recompute_sigma()
        self.active = [
            i for i in range(n) if adj_x.var_edge_lists[i] or adj_z.var_edge_lists[i]
        ]

    @staticmethod
    def _residual(adj, syn, e) -> list[int]:
        ev = adj.edge_var_list
        delta = list(syn)
        for j, edges in enumerate(adj.check_edge_lists):
            for k in edges:
                delta[j] ^= e[ev[k]]
        return delta

    def recompute_delta(self) -> tuple[list[int], list[int]]:
        return (
            self._residual(self.adj_x, self.syn_x, self.e_x),
            self._residual(self.adj_z, self.syn_z, self.e_z),
        )

    def recompute_sigma(self) -> list[int]:
        return [
            pack_state(local_state(self.adj_x, self.delta_x, i), local_state(self.adj_z, self.delta_z, i), self.a_max)
            for i in range(self.n)
        ]

    @property
    def s_max(self) -> int:
        return 2 ** (2 * self.a_max)

    def degree(self, i: int) -> int:
        return len(self.adj_x.var_edge_lists[i]) + len(self.adj_z.var_edge_lists[i])

    def update(self, i: int) -> tuple[bool, bool]:
        return quat_svns_update(self, i)

    def beliefs(self, i: int) -> list[float]:
        return belief(self.log_kappa, self.L_z[i], self.L_x[i])

    def estimate(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.e_x, dtype=np.uint8), np.asarray(self.e_z, dtype=np.uint8)

    def set_decision(self, i: int, q: int) -> tuple[bool, bool]:
        """Adopt Pauli ``q`` at ``i`` and patch residuals, w and sigma."""
        self.qhat[i] = q
        fx = E_X[q] != self.e_x[i]
        fz = E_Z[q] != self.e_z[i]
        if fx:
            self.e_x[i] ^= 1
            self._flip_checks(self.adj_x, self.delta_x, i, 0)
        if fz:
            self.e_z[i] ^= 1
            self._flip_checks(self.adj_z, self.delta_z, i, self.a_max)
        return fx, fz

    def _flip_checks(self, adj, delta, i: int, shift: int) -> None:
        ec, ev, beta = adj.edge_check_list, adj.edge_var_list, adj.beta_list
        sigma = self.sigma
        for k in adj.var_edge_lists[i]:
            j = ec[k]
            delta[j] ^= 1
            self.w += 2 * delta[j] - 1
            for k2 in adj.check_edge_lists[j]:
                sigma[ev[k2]] ^= beta[k2] << shift


def init_quat(adj_x, adj_z, syndromes, prior: DepolPrior, cfg: BpConfig | None = None, **kw) -> QuatState:
    cfg = cfg or BpConfig()
    return QuatState(adj_x, adj_z, syndromes, prior, cfg.llr_clip, **kw)


def _vn_update(state: QuatState, i: int) -> tuple[float, float]:
    """Steps 2-3 at ``i`` given fresh c2v messages; returns ``(L_x, L_z)``."""
    ex = state.adj_x.var_edge_lists[i]
    ez = state.adj_z.var_edge_lists[i]
    lim, lk = state.lim, state.log_kappa
    c2v_x, c2v_z = state.c2v_x, state.c2v_z
    L_x = state.mu_x[i]
    for k in ex:
        L_x += c2v_x[k]
    L_z = state.mu_z[i]
    for k in ez:
        L_z += c2v_z[k]
    v2c_x, v2c_z = state.v2c_x, state.v2c_z
    for k in ex:
        v2c_x[k] = clip(msg_x(lk, L_z, L_x - c2v_x[k]), lim)
    for k in ez:
        v2c_z[k] = clip(msg_z(lk, L_z - c2v_z[k], L_x), lim)
    state.L_x[i] = L_x
    state.L_z[i] = L_z
    return L_x, L_z


def quat_svns_update(state: QuatState, i: int) -> tuple[bool, bool]:
    ex = state.adj_x.var_edge_lists[i]
    ez = state.adj_z.var_edge_lists[i]
    if not ex and not ez:
        return False, False
    lim = state.lim
    for k in ex:
        state.c2v_x[k] = _c2v(state.adj_x, state.v2c_x, state.syn_x, k, lim)
    for k in ez:
        state.c2v_z[k] = _c2v(state.adj_z, state.v2c_z, state.syn_z, k, lim)
    L_x, L_z = _vn_update(state, i)
    return state.set_decision(i, hard_decision(state.log_kappa, L_z, L_x))


def pack_state(sigma_x: int, sigma_z: int, a_max: int) -> int:
    return sigma_x + (sigma_z << a_max)


def joint_state(state: QuatState, i: int) -> int:
    """Joint state of ``i`` recomputed from the residuals."""
    return pack_state(
        local_state(state.adj_x, state.delta_x, i), local_state(state.adj_z, state.delta_z, i), state.a_max
    )


def quat_flooding_round(state: QuatState) -> None:
    lim = state.lim
    for adj, v2c, c2v, syn in (
        (state.adj_x, state.v2c_x, state.c2v_x, state.syn_x),
        (state.adj_z, state.v2c_z, state.c2v_z, state.syn_z),
    ):
        x = [math.tanh(m / 2.0) for m in v2c]
        for j, edges in enumerate(adj.check_edge_lists):
            sign = -1.0 if syn[j] else 1.0
            for k in edges:
                prod = sign
                for k2 in edges:
                    if k2 != k:
                        prod *= x[k2]
                c2v[k] = atanh2(prod, lim)
    for i in state.active:
        L_x, L_z = _vn_update(state, i)
        q = hard_decision(state.log_kappa, L_z, L_x)
        state.qhat[i] = q
        state.e_x[i] = E_X[q]
        state.e_z[i] = E_Z[q]
    state.delta_x, state.delta_z = state.recompute_delta()
    state.w = sum(state.delta_x) + sum(state.delta_z)
    state.sigma = state.recompute_sigma()


MODES = ("flooding", "index", "random", "greedy")


def decode_quat(
    adj_x: TannerAdjacency,
    adj_z: TannerAdjacency,
    syndromes,
    prior: DepolPrior,
    cfg: BpConfig | None = None,
    mode: str = "greedy",
    q: QTable | None = None,
    rng=None,
    trace: list | None = None,
    **state_kw,
) -> DecodeResult:
    cfg = cfg or BpConfig()
    state = init_quat(adj_x, adj_z, syndromes, prior, cfg, **state_kw)
    if mode == "flooding":
        converged, iters = run_flooding(state, quat_flooding_round, cfg.max_iters)
    else:
        if mode == "index":
            schedule = index_schedule
        elif mode == "random":
            schedule = random_schedule(as_rng(rng))
        elif mode == "greedy":
            if q is None:
                raise ValueError("greedy mode needs a Q-table")
            if q.variant != "quat":
                raise ValueError(f"greedy quaternary decoding needs a 'quat' table, got {q.variant!r}")
            schedule = greedy_schedule(q)
        else:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        converged, iters = run_sequential(state, schedule, cfg.max_iters, trace)
    return DecodeResult(state.estimate(), converged, iters, state)


def quat_qtable(adj_x: TannerAdjacency, adj_z: TannerAdjacency) -> QTable:
    a = max(adj_x.a_max, adj_z.a_max)
    return QTable(2 ** (2 * a), adj_x.n_vars, "quat")


def train_quat(
    code: CssCode,
    adj_x: TannerAdjacency,
    adj_z: TannerAdjacency,
    cfg: TrainConfig,
    progress=None,
    stats: TrainStats | None = None,
) -> QTable:
    """Q-learning of the two-stream schedule; ``cfg.grid`` holds depolarizing rates."""
    priors = {p: DepolPrior.from_p(p) for p in cfg.grid}

    def make_env(p, rng):
        frame = sample_depolarizing(code.n, p, rng)
        return QuatState(adj_x, adj_z, frame_syndrome(code, frame), priors[p], cfg.llr_clip)

    return train_generic(quat_qtable(adj_x, adj_z), make_env, cfg, progress, stats)
