"""Guided decimation around flooding or scheduled inner decoders.

Each block runs the inner decoder from scratch on the current priors. If it
fails, the undecimated variable with the most confident belief has its
decision frozen by saturating its prior, and the next block starts again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

from .bp import BpConfig, as_prior, decode_flooding, decode_svns, index_schedule
from .channel import L_MAX
from .fast import decode_fast
from .graph import TannerAdjacency
from .quaternary import TIE_TOL, DepolPrior, belief, decode_quat
from .rl import QTable

INNER = ("flooding", "greedy", "index")


@dataclass(frozen=True)
class GdConfig:
    inner_iters: int = 100
    inner: str = "flooding"
    freeze_magnitude: float = L_MAX
    llr_clip: float = L_MAX

    def __post_init__(self):
        if self.inner_iters < 1:
            raise ValueError("inner_iters must be >= 1")
        if self.inner not in INNER:
            raise ValueError(f"inner decoder must be one of {INNER}, got {self.inner!r}")
        if self.freeze_magnitude < self.llr_clip:
            raise ValueError("freeze_magnitude must be at least llr_clip")

    def freeze_for(self, a_max: int) -> float:
        # a frozen prior has to outweigh every clipped incoming message at once
        return max(self.freeze_magnitude, (a_max + 1) * self.llr_clip)

    @property
    def bp(self) -> BpConfig:
        return BpConfig(self.inner_iters, self.llr_clip)


@dataclass
class GdResult:
    e_hat: Any
    converged: bool
    iterations: int
    decimations: int
    frozen: list[int] = field(default_factory=list)
    fixed: dict = field(default_factory=dict)
    blocks: list[tuple[int, bool]] = field(default_factory=list, repr=False)


def _argmax_free(scores: Sequence[float], frozen: Sequence[bool], tol: float = TIE_TOL) -> int:
    """Lowest free index whose score is within ``tol`` of the free maximum.

    Symmetric codes produce exact ties that rounding in different but
    equivalent engines would otherwise break differently.
    """
    free = [v for v, f in zip(scores, frozen) if not f]
    if not free:
        return -1
    top = max(free)
    for i, v in enumerate(scores):
        if not frozen[i] and v >= top - tol:
            return i
    return -1


def _inner_binary(adj, syndrome, prior, cfg: GdConfig, q):
    bp = cfg.bp
    if cfg.inner == "flooding":
        return decode_flooding(adj, syndrome, prior, bp)
    if cfg.inner == "index":
        return decode_svns(adj, syndrome, prior, bp, index_schedule)
    if q is None:
        raise ValueError("greedy inner decoder needs a Q-table")
    return decode_fast(adj, q, syndrome, prior, bp)


def decode_gd(
    adj: TannerAdjacency,
    syndrome,
    prior,
    cfg: GdConfig | None = None,
    q: QTable | None = None,
) -> GdResult:
    """Binary guided decimation; ``decimations`` counts the blocks run."""
    cfg = cfg or GdConfig()
    n = adj.n_vars
    mu = as_prior(prior, n)
    freeze = cfg.freeze_for(adj.a_max)
    frozen = [False] * n
    order: list[int] = []
    fixed: dict = {}
    total = 0
    blocks: list[tuple[int, bool]] = []
    while True:
        res = _inner_binary(adj, syndrome, mu, cfg, q)
        total += res.iterations
        blocks.append((res.iterations, res.converged))
        if res.converged or len(order) == n:
            break
        st = res.state
        i = _argmax_free([abs(L) for L in st.belief], frozen)
        frozen[i] = True
        order.append(i)
        mu[i] = -freeze if st.hard[i] else freeze
        fixed[i] = int(st.hard[i])
    return GdResult(res.e_hat, res.converged, total, len(blocks), order, fixed, blocks)


def decode_quat_gd(
    adj_x: TannerAdjacency,
    adj_z: TannerAdjacency,
    syndromes,
    prior: DepolPrior,
    cfg: GdConfig | None = None,
    q: QTable | None = None,
) -> GdResult:
    """Two-stream guided decimation freezing whole Paulis."""
    cfg = cfg or GdConfig()
    n = adj_x.n_vars
    mu_x = [prior.mu_dep] * n
    mu_z = [prior.mu_dep] * n
    freeze = cfg.freeze_for(max(adj_x.a_max, adj_z.a_max))
    mode = {"flooding": "flooding", "index": "index", "greedy": "greedy"}[cfg.inner]
    if mode == "greedy" and q is None:
        raise ValueError("greedy inner decoder needs a Q-table")
    frozen = [False] * n
    order: list[int] = []
    fixed: dict = {}
    total = 0
    blocks: list[tuple[int, bool]] = []
    while True:
        res = decode_quat(adj_x, adj_z, syndromes, prior, cfg.bp, mode, q=q, mu_x=mu_x, mu_z=mu_z)
        total += res.iterations
        blocks.append((res.iterations, res.converged))
        if res.converged or len(order) == n:
            break
        st = res.state
        conf = [max(belief(st.log_kappa, st.L_z[i], st.L_x[i])) for i in range(n)]
        i = _argmax_free(conf, frozen)
        frozen[i] = True
        order.append(i)
        mu_x[i] = -freeze if st.e_x[i] else freeze
        mu_z[i] = -freeze if st.e_z[i] else freeze
        fixed[i] = (int(st.e_x[i]), int(st.e_z[i]))
    return GdResult(res.e_hat, res.converged, total, len(blocks), order, fixed, blocks)


def gd_stats(records) -> float:
    """Mean decimation count over results, outcomes or plain integers."""
    vals = []
    for r in records:
        if isinstance(r, int):
            vals.append(r)
        elif hasattr(r, "decimations_used"):
            vals.append(r.decimations_used)
        else:
            vals.append(r.decimations)
    if not vals:
        raise ValueError("no records to average")
    return sum(vals) / len(vals)
