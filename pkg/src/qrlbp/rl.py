"""Tabular Q-learning of the variable-node update order."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .bp import BpConfig, init_state
from .channel import NoiseParams, as_rng, prior_llr, sample_bitflip
from .codes import CssCode
from .gf2 import mat_vec_mul
from .graph import TannerAdjacency

QTABLE_MAGIC = "QTABLE"
QTABLE_VERSION = "v1"
VARIANTS = ("binary", "quat")


class QTableFormatError(ValueError):
    pass


class QTable:
    """Sparse action-value table ``Q(sigma, i)``; missing entries read as 0."""

    def __init__(self, s_max: int, n: int, variant: str = "binary"):
        if variant not in VARIANTS:
            raise ValueError(f"unknown Q-table variant {variant!r}")
        self.s_max = s_max
        self.n = n
        self.variant = variant
        self.values: dict[tuple[int, int], float] = {}

    def __getitem__(self, key: tuple[int, int]) -> float:
        return self.values.get(key, 0.0)

    def __setitem__(self, key: tuple[int, int], value: float) -> None:
        s, i = key
        if not (0 <= s < self.s_max and 0 <= i < self.n):
            raise IndexError(f"entry {key} outside table {self.s_max} x {self.n}")
        self.values[key] = float(value)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QTable)
            and (self.s_max, self.n, self.variant) == (other.s_max, other.n, other.variant)
            and self.values == other.values
        )

    def __repr__(self) -> str:
        return f"QTable({self.variant}, s_max={self.s_max}, n={self.n}, entries={len(self)})"

    def top(self, k: int) -> list[tuple[int, int, float]]:
        items = sorted(self.values.items(), key=lambda kv: (-abs(kv[1]), kv[0]))
        return [(s, i, v) for (s, i), v in items[:k]]


def binary_qtable(adj: TannerAdjacency) -> QTable:
    return QTable(2 ** adj.a_max, adj.n_vars, "binary")


def save_qtable(q: QTable, path: str | Path) -> None:
    lines = [f"{QTABLE_MAGIC} {QTABLE_VERSION} {q.variant} {q.s_max} {q.n} {len(q)}"]
    for (s, i), v in sorted(q.values.items()):
        lines.append(f"{s} {i} {v:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_qtable(path: str | Path, variant: str | None = None) -> QTable:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise QTableFormatError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 6 or head[0] != QTABLE_MAGIC:
        raise QTableFormatError(f"{path}: bad header {lines[0]!r}")
    if head[1] != QTABLE_VERSION:
        raise QTableFormatError(f"{path}: unsupported version {head[1]!r}")
    if variant is not None and head[2] != variant:
        raise QTableFormatError(f"{path}: table variant {head[2]!r}, expected {variant!r}")
    try:
        q = QTable(int(head[3]), int(head[4]), head[2])
        count = int(head[5])
    except ValueError as exc:
        raise QTableFormatError(f"{path}: {exc}") from None
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != count:
        raise QTableFormatError(f"{path}: header promises {count} entries, found {len(body)}")
    for lineno, ln in enumerate(body, start=2):
        parts = ln.split()
        try:
            s, i, v = int(parts[0]), int(parts[1]), float(parts[2])
            if len(parts) != 3:
                raise ValueError("expected 3 fields")
            q[s, i] = v
        except (ValueError, IndexError) as exc:
            raise QTableFormatError(f"{path}:{lineno}: {exc}") from None
    return q


# ---------------------------------------------------------------------------
# policy pieces


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 100_000
    grid: tuple[float, ...] = (0.03, 0.04, 0.05, 0.06, 0.07)
    alpha: float = 0.1
    gamma: float = 0.9
    eps0: float = 0.6
    eps_min: float = 0.05
    max_iters: int = 100
    seed: int = 0
    llr_clip: float = BpConfig().llr_clip

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0 <= self.gamma < 1:
            raise ValueError("gamma must lie in [0, 1)")
        if not 0 <= self.eps_min <= self.eps0 <= 1:
            raise ValueError("need 0 <= eps_min <= eps0 <= 1")
        if self.episodes < 0 or self.max_iters < 1:
            raise ValueError("episodes must be >= 0 and max_iters >= 1")
        if not self.grid:
            raise ValueError("training grid is empty")


def epsilon_at(cfg: TrainConfig, episode: int) -> float:
    """Linearly decayed exploration rate for 1-based ``episode``."""
    if cfg.episodes <= 1:
        return cfg.eps0
    frac = (episode - 1) / (cfg.episodes - 1)
    return max(cfg.eps_min, cfg.eps0 * (1 - frac))


def reward(w_before: int, w_after: int, degree_sum: int) -> float:
    if degree_sum <= 0:
        raise ValueError("reward undefined for an isolated node")
    r = (w_before - w_after) / degree_sum
    if w_after == 0:
        r += 1.0
    return r


def select_action(
    q: QTable,
    sigma: Sequence[int],
    remaining: Sequence[int],
    eps: float,
    rng: np.random.Generator | None = None,
    inference: bool = False,
) -> int:
    """Epsilon-greedy choice among ``remaining``.

    Ties on the greedy branch are broken uniformly at random during
    training and by lowest index when ``inference`` is set.
    """
    if not remaining:
        raise ValueError("no remaining variable to schedule")
    if eps > 0 and rng.random() < eps:
        return remaining[int(rng.integers(len(remaining)))]
    vals = q.values
    if inference:
        best, best_u = None, None
        for u in remaining:
            v = vals.get((sigma[u], u), 0.0)
            if best is None or v > best or (v == best and u < best_u):
                best, best_u = v, u
        return best_u
    best = max(vals.get((sigma[u], u), 0.0) for u in remaining)
    ties = [u for u in remaining if vals.get((sigma[u], u), 0.0) == best]
    if len(ties) == 1:
        return ties[0]
    return ties[int(rng.integers(len(ties)))]


def greedy_schedule(q: QTable):
    """Reference greedy policy: linear-scan argmax over the remaining set."""

    def order(state, active) -> Iterator[int]:
        remaining = list(active)
        while remaining:
            a = select_action(q, state.sigma, remaining, 0.0, inference=True)
            remaining.remove(a)
            yield a

    return order


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainStats:
    episodes: int = 0
    solved: int = 0
    rewards_min: float = float("inf")
    rewards_max: float = float("-inf")
    history: list[tuple[int, float]] = field(default_factory=list)


def run_episode(env, q: QTable, eps: float, cfg: TrainConfig, rng, stats: TrainStats | None = None) -> bool:
    """One Q-learning episode on an initialised environment.

    ``env`` exposes ``active``, ``sigma``, ``w``, ``update(a)`` and
    ``degree(a)``. Returns whether the residual reached zero.
    """
    vals = q.values
    alpha, gamma = cfg.alpha, cfg.gamma
    active = env.active
    for _ in range(cfg.max_iters):
        if env.w == 0:
            break
        remaining = list(active)
        for _ in range(len(remaining)):
            if env.w == 0:
                break
            sigma = env.sigma
            a = select_action(q, sigma, remaining, eps, rng)
            key = (sigma[a], a)
            w_before = env.w
            env.update(a)
            r = reward(w_before, env.w, env.degree(a))
            if stats is not None:
                stats.rewards_min = min(stats.rewards_min, r)
                stats.rewards_max = max(stats.rewards_max, r)
            remaining.remove(a)
            if remaining:
                sigma = env.sigma
                best_future = max(vals.get((sigma[u], u), 0.0) for u in remaining)
            else:
                best_future = 0.0
            old = vals.get(key, 0.0)
            vals[key] = old + alpha * (r + gamma * best_future - old)
    return env.w == 0


def train_generic(
    q: QTable,
    make_env: Callable[[float, np.random.Generator], object],
    cfg: TrainConfig,
    progress: Callable[[TrainStats], None] | None = None,
    stats: TrainStats | None = None,
    report_every: int = 1000,
) -> QTable:
    rng = as_rng(cfg.seed)
    stats = stats if stats is not None else TrainStats()
    window = 0
    for episode in range(1, cfg.episodes + 1):
        eps = epsilon_at(cfg, episode)
        p = cfg.grid[int(rng.integers(len(cfg.grid)))]
        env = make_env(p, rng)
        solved = run_episode(env, q, eps, cfg, rng, stats)
        stats.episodes += 1
        stats.solved += solved
        window += solved
        if episode % report_every == 0:
            stats.history.append((episode, window / report_every))
            window = 0
            if progress is not None:
                progress(stats)
    return q


def train(
    code: CssCode,
    adj: TannerAdjacency,
    cfg: TrainConfig,
    progress=None,
    stats: TrainStats | None = None,
) -> QTable:
    """Q-learning of the SVNS schedule under bit-flip noise on ``code.h_a``."""
    bp_cfg = BpConfig(cfg.max_iters, cfg.llr_clip)

    def make_env(p, rng):
        e = sample_bitflip(code.n, p, rng)
        s = mat_vec_mul(code.h_a, e)
        return init_state(adj, s, prior_llr(NoiseParams.bitflip(p)), bp_cfg)

    return train_generic(binary_qtable(adj), make_env, cfg, progress, stats)
